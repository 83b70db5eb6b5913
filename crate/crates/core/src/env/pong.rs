//! Two-paddle Pong in the unit square. Red is the left paddle, blue the right.
//!
//! Each policy sees `[ball x, ball y, ball vx, ball vy, own paddle y,
//! opponent paddle y]`. Positions map to [-1, 1]; the velocity is the unit
//! direction of travel. The right paddle observes the mirrored arena
//! (x -> 1 - x), so a genome plays identically from either side.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{rng_from_seed, EnvId, FitnessPair, Genome, Side};
use crate::scalar::Scalar;

use super::{pong_fitness, Event, EventKind, Policy, PongParams, RasterWindow, Trajectory};

pub const ENTITIES: [&str; 3] = ["ball", "left_paddle", "right_paddle"];

struct Ball<F> {
    pos: [F; 2],
    vel: [F; 2],
    speed: F,
}

fn serve<F: Scalar>(p: &PongParams, toward: Side, rng: &mut ChaCha8Rng) -> Ball<F> {
    let angle = rng.random_range(-p.serve_half_angle..=p.serve_half_angle);
    let dir_x = match toward {
        Side::Red => -angle.cos(),
        Side::Blue => angle.cos(),
    };
    let speed = F::lit(p.ball_speed);
    Ball {
        pos: [F::half(), F::half()],
        vel: [speed * F::lit(dir_x), speed * F::lit(angle.sin())],
        speed,
    }
}

pub(super) fn simulate<F: Scalar>(
    p: &PongParams,
    grid: usize,
    red: &Genome<F>,
    blue: &Genome<F>,
    seed: u64,
) -> Result<(Trajectory<F>, FitnessPair<F>)> {
    let mut rng = rng_from_seed(seed);
    let one = F::one();
    let two = F::lit(2.0);
    let r = F::lit(p.ball_radius);
    let half_h = F::lit(p.paddle_height / 2.0);
    let x_left = F::lit(p.left_paddle_x);
    let x_right = F::lit(p.right_paddle_x);
    let paddle_speed = F::lit(p.paddle_speed);
    let speedup = F::lit(p.rebound_speedup);

    let window = RasterWindow {
        min: [F::zero(), F::zero()],
        max: [one, one],
        grid,
    };
    let mut traj = Trajectory::new(EnvId::Pong, &ENTITIES, one, window, p.steps);
    let mut left = Policy::new(red);
    let mut right = Policy::new(blue);

    let first = if rng.random_bool(0.5) {
        Side::Red
    } else {
        Side::Blue
    };
    let mut ball: Ball<F> = serve(p, first, &mut rng);
    let (mut y_left, mut y_right) = (F::half(), F::half());
    let (mut points_red, mut points_blue) = (0u32, 0u32);
    let to_unit = |v: F| two * v - one;

    for step in 0..p.steps {
        let dir = [ball.vel[0] / ball.speed, ball.vel[1] / ball.speed];
        let obs_left = [
            to_unit(ball.pos[0]),
            to_unit(ball.pos[1]),
            dir[0],
            dir[1],
            to_unit(y_left),
            to_unit(y_right),
        ];
        let obs_right = [
            to_unit(one - ball.pos[0]),
            to_unit(ball.pos[1]),
            -dir[0],
            dir[1],
            to_unit(y_right),
            to_unit(y_left),
        ];
        let a_left = left.act(&obs_left)?;
        let a_right = right.act(&obs_right)?;
        y_left = (y_left + a_left * paddle_speed)
            .max(half_h)
            .min(one - half_h);
        y_right = (y_right + a_right * paddle_speed)
            .max(half_h)
            .min(one - half_h);

        let prev = ball.pos;
        ball.pos[0] += ball.vel[0];
        ball.pos[1] += ball.vel[1];
        // top and bottom walls
        for _ in 0..4 {
            if ball.pos[1] - r < F::zero() {
                ball.pos[1] = two * r - ball.pos[1];
                ball.vel[1] = -ball.vel[1];
            } else if ball.pos[1] + r > one {
                ball.pos[1] = two * (one - r) - ball.pos[1];
                ball.vel[1] = -ball.vel[1];
            } else {
                break;
            }
        }

        // paddle planes, crossed this step by the ball's leading edge
        let crossing = |plane: F, lead_prev: F, lead_now: F| -> F {
            let t = (lead_prev - plane) / (lead_prev - lead_now);
            prev[1] + t * (ball.pos[1] - prev[1])
        };
        let mut rebound = None;
        if ball.vel[0] < F::zero() && prev[0] - r >= x_left && ball.pos[0] - r < x_left {
            let y = crossing(x_left, prev[0] - r, ball.pos[0] - r);
            if (y - y_left).abs() <= half_h + r {
                ball.pos[0] = two * (x_left + r) - ball.pos[0];
                rebound = Some(Side::Red);
            }
        } else if ball.vel[0] > F::zero() && prev[0] + r <= x_right && ball.pos[0] + r > x_right {
            let y = crossing(x_right, prev[0] + r, ball.pos[0] + r);
            if (y - y_right).abs() <= half_h + r {
                ball.pos[0] = two * (x_right - r) - ball.pos[0];
                rebound = Some(Side::Blue);
            }
        }
        if let Some(side) = rebound {
            ball.vel[0] = -ball.vel[0];
            ball.vel[0] *= speedup;
            ball.vel[1] *= speedup;
            ball.speed *= speedup;
            traj.events.push(Event {
                step,
                kind: EventKind::Rebound {
                    side,
                    speed: ball.speed,
                },
            });
        }

        let scorer = if ball.pos[0] < F::zero() {
            Some(Side::Blue)
        } else if ball.pos[0] > one {
            Some(Side::Red)
        } else {
            None
        };
        if let Some(scorer) = scorer {
            match scorer {
                Side::Red => points_red += 1,
                Side::Blue => points_blue += 1,
            }
            traj.events.push(Event {
                step,
                kind: EventKind::Point { scorer },
            });
            ball = serve(p, scorer.opponent(), &mut rng);
        }

        traj.push_row(&[ball.pos, [x_left, y_left], [x_right, y_right]], step)?;
    }

    Ok((traj, pong_fitness(points_red, points_blue)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{evaluate_duel, EnvParams};

    #[test]
    fn idle_paddles_tie_when_nobody_scores() {
        let params = EnvParams::default();
        let red = Genome::<f64>::zeros(EnvId::Pong, Side::Red);
        let blue = Genome::<f64>::zeros(EnvId::Pong, Side::Blue);
        let mut saw_zero_score = false;
        for seed in 0..40 {
            let out = evaluate_duel(EnvId::Pong, &params, &red, &blue, seed).unwrap();
            let points = out
                .trajectory
                .events
                .iter()
                .filter(|e| matches!(e.kind, EventKind::Point { .. }))
                .count();
            if points == 0 {
                saw_zero_score = true;
                assert_eq!(out.fitness.red, 0.5);
                assert_eq!(out.fitness.blue, 0.5);
            }
        }
        assert!(
            saw_zero_score,
            "some serve should hit a centered idle paddle"
        );
    }

    #[test]
    fn ball_speeds_up_five_percent_per_rebound() {
        let params = EnvParams::default();
        // A tracking policy: paddle follows the ball's height.
        // obs[1] is ball y, obs[4] own paddle y; output tanh(10 (ball - own)).
        // hidden unit 0 reads inputs 1 and 4 (row-major weights)
        let tracker = |side| {
            let mut g = Genome::<f64>::zeros(EnvId::Pong, side);
            g.params[1] = 1.0;
            g.params[4] = -1.0;
            let l1 = 6 * 32 + 32;
            g.params[l1] = 3.0;
            let l2 = l1 + 32 * 16 + 16;
            g.params[l2] = 3.0;
            g
        };
        let (red, blue) = (tracker(Side::Red), tracker(Side::Blue));
        let mut checked = 0;
        for seed in 0..10 {
            let out = evaluate_duel(EnvId::Pong, &params, &red, &blue, seed).unwrap();
            let mut since_serve = 0;
            for e in &out.trajectory.events {
                match e.kind {
                    EventKind::Point { .. } => since_serve = 0,
                    EventKind::Rebound { speed, .. } => {
                        since_serve += 1;
                        let expected = 0.01 * 1.05f64.powi(since_serve);
                        assert!((speed - expected).abs() <= 1e-12 * expected);
                        checked += 1;
                    }
                    EventKind::Capture { .. } => unreachable!(),
                }
            }
        }
        assert!(
            checked > 10,
            "tracking paddles should rebound the ball, got {checked}"
        );
    }

    #[test]
    fn positions_stay_in_arena() {
        let params = EnvParams::default();
        let mut rng = crate::model::rng_from_seed(8);
        let red = Genome::<f64>::random(EnvId::Pong, Side::Red, &mut rng);
        let blue = Genome::<f64>::random(EnvId::Pong, Side::Blue, &mut rng);
        let out = evaluate_duel(EnvId::Pong, &params, &red, &blue, 1).unwrap();
        assert_eq!(out.trajectory.steps(), 1000);
        for p in &out.trajectory.positions {
            assert!((-0.05..=1.05).contains(&p[0]) && (0.0..=1.0).contains(&p[1]));
        }
    }
}
