//! Pursuers-and-evaders: two pursuers (red, one shared policy) chase two
//! evaders (blue, one shared policy) at equal speed in a walled square with a
//! blocking central disc.
//!
//! Observation of an agent: `[own x, own y, opponent 1 relative (2),
//! opponent 2 relative (2), teammate relative (2), id (+1 / -1), evader 1
//! caught, evader 2 caught]`. Relative positions are halved so they stay in
//! [-1, 1]. The output times pi is the heading. Caught evaders freeze.

use rand::Rng;

use crate::error::Result;
use crate::model::{rng_from_seed, EnvId, FitnessPair, Genome};
use crate::scalar::Scalar;

use super::{pursuit_fitness, Event, EventKind, Policy, PursuitParams, RasterWindow, Trajectory};

pub const ENTITIES: [&str; 4] = ["pursuer_1", "pursuer_2", "evader_1", "evader_2"];

/// Moves by `step` along `heading`, then clamps to the arena and pushes any
/// position inside the disc back onto its boundary.
fn advance<F: Scalar>(pos: [F; 2], heading: F, step: F, half: F, disc: F) -> [F; 2] {
    let mut next = [
        (pos[0] + step * heading.cos()).max(-half).min(half),
        (pos[1] + step * heading.sin()).max(-half).min(half),
    ];
    let r = next[0].hypot(next[1]);
    if r < disc {
        if r > F::zero() {
            next = [next[0] * disc / r, next[1] * disc / r];
        } else {
            let back = pos[0].hypot(pos[1]);
            next = [pos[0] * disc / back, pos[1] * disc / back];
        }
    }
    next
}

fn observation<F: Scalar>(
    own: [F; 2],
    opponents: [[F; 2]; 2],
    mate: [F; 2],
    id: F,
    caught: [bool; 2],
) -> [F; 11] {
    let h = F::half();
    let flag = |c: bool| if c { F::one() } else { F::zero() };
    [
        own[0],
        own[1],
        (opponents[0][0] - own[0]) * h,
        (opponents[0][1] - own[1]) * h,
        (opponents[1][0] - own[0]) * h,
        (opponents[1][1] - own[1]) * h,
        (mate[0] - own[0]) * h,
        (mate[1] - own[1]) * h,
        id,
        flag(caught[0]),
        flag(caught[1]),
    ]
}

fn distance<F: Scalar>(a: [F; 2], b: [F; 2]) -> F {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(super) fn simulate<F: Scalar>(
    p: &PursuitParams,
    grid: usize,
    red: &Genome<F>,
    blue: &Genome<F>,
    seed: u64,
) -> Result<(Trajectory<F>, FitnessPair<F>)> {
    let mut rng = rng_from_seed(seed);
    let mut jittered = |s: [f64; 2]| -> [F; 2] {
        let j = p.start_jitter;
        let dx = if j > 0.0 {
            rng.random_range(-j..=j)
        } else {
            0.0
        };
        let dy = if j > 0.0 {
            rng.random_range(-j..=j)
        } else {
            0.0
        };
        [F::lit(s[0] + dx), F::lit(s[1] + dy)]
    };
    let mut pursuers = [jittered(p.pursuer_starts[0]), jittered(p.pursuer_starts[1])];
    let mut evaders = [jittered(p.evader_starts[0]), jittered(p.evader_starts[1])];

    let dt = F::lit(p.dt);
    let step_len = F::lit(p.speed) * dt;
    let half = F::lit(p.arena_half);
    let disc = F::lit(p.disc_radius);
    let thresh = F::lit(p.capture_radius);
    let pi = F::PI();

    let window = RasterWindow {
        min: [-half, -half],
        max: [half, half],
        grid,
    };
    let mut traj = Trajectory::new(EnvId::Pursuit, &ENTITIES, dt, window, p.steps);
    let mut pursuer_policy = Policy::new(red);
    let mut evader_policy = Policy::new(blue);

    let closest =
        |pursuers: &[[F; 2]; 2], e: [F; 2]| distance(pursuers[0], e).min(distance(pursuers[1], e));
    let d_init = [
        closest(&pursuers, evaders[0]),
        closest(&pursuers, evaders[1]),
    ];
    let mut d_min = d_init;
    let mut catch_times: [Option<F>; 2] = [None, None];
    let ids = [F::one(), -F::one()];

    for step in 0..p.steps {
        let caught = [catch_times[0].is_some(), catch_times[1].is_some()];
        let mut headings = [F::zero(); 4];
        for i in 0..2 {
            let obs = observation(pursuers[i], evaders, pursuers[1 - i], ids[i], caught);
            headings[i] = pursuer_policy.act(&obs)? * pi;
        }
        for i in 0..2 {
            let obs = observation(evaders[i], pursuers, evaders[1 - i], ids[i], caught);
            headings[2 + i] = evader_policy.act(&obs)? * pi;
        }
        for i in 0..2 {
            pursuers[i] = advance(pursuers[i], headings[i], step_len, half, disc);
            if !caught[i] {
                evaders[i] = advance(evaders[i], headings[2 + i], step_len, half, disc);
            }
        }

        traj.push_row(&[pursuers[0], pursuers[1], evaders[0], evaders[1]], step)?;

        for i in 0..2 {
            if catch_times[i].is_some() {
                continue;
            }
            let d = closest(&pursuers, evaders[i]);
            d_min[i] = d_min[i].min(d);
            if d < thresh {
                catch_times[i] = Some(F::lit((step + 1) as f64) * dt);
                traj.events.push(Event {
                    step,
                    kind: EventKind::Capture { entity: 2 + i },
                });
            }
        }
    }

    let fitness = pursuit_fitness(catch_times, d_min, d_init, F::lit(p.t_max()), thresh)?;
    Ok((traj, fitness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{evaluate_duel, EnvParams};
    use crate::model::Side;

    #[test]
    fn disc_blocks_motion() {
        let p = advance([0.31f64, 0.0], std::f64::consts::PI, 0.05, 1.0, 0.3);
        assert!((p[0].hypot(p[1]) - 0.3).abs() < 1e-12);
        let q = advance([0.99f64, 0.0], 0.0, 0.05, 1.0, 0.3);
        assert_eq!(q, [1.0, 0.0]);
    }

    #[test]
    fn agents_stay_inside_arena_and_off_disc() {
        let params = EnvParams::default();
        let mut rng = rng_from_seed(21);
        for seed in 0..5 {
            let red = Genome::<f64>::random(EnvId::Pursuit, Side::Red, &mut rng);
            let blue = Genome::<f64>::random(EnvId::Pursuit, Side::Blue, &mut rng);
            let out = evaluate_duel(EnvId::Pursuit, &params, &red, &blue, seed).unwrap();
            for pos in &out.trajectory.positions {
                assert!(pos[0].abs() <= 1.0 && pos[1].abs() <= 1.0);
                assert!(pos[0].hypot(pos[1]) >= 0.3 - 1e-12);
            }
            assert!((0.0..=1.0).contains(&out.fitness.red));
        }
    }

    #[test]
    fn caught_evaders_freeze() {
        // pursuers head straight for +x (output 0) toward evaders waiting at
        // x = 0.8; evaders run into their own wall corner and stay there.
        let mut params = EnvParams::default();
        params.pursuit.start_jitter = 0.0;
        params.pursuit.pursuer_starts = [[-0.9, 0.5], [-0.9, -0.5]];
        params.pursuit.evader_starts = [[0.5, 0.5], [0.5, -0.5]];
        let red = Genome::<f64>::zeros(EnvId::Pursuit, Side::Red);
        let blue = Genome::<f64>::zeros(EnvId::Pursuit, Side::Blue);
        let out = evaluate_duel(EnvId::Pursuit, &params, &red, &blue, 0).unwrap();
        let captures: Vec<_> = out
            .trajectory
            .events
            .iter()
            .map(|e| (e.step, e.kind.clone()))
            .collect();
        assert_eq!(captures.len(), 2, "{captures:?}");
        let (step, _) = captures[0];
        let frozen = out.trajectory.row(step)[2];
        for s in step..out.trajectory.steps() {
            assert_eq!(out.trajectory.row(s)[2], frozen);
        }
        // both caught at the same time t: fitness is 1 - t/(2 T_max)
        let t = (step + 1) as f64 * 0.01;
        assert!((out.fitness.red - (1.0 - t / 10.0)).abs() < 1e-9);
    }
}
