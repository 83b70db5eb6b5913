//! Cat-and-mouse: a fast cat with bounded turn rate (red) chases an agile,
//! slower mouse (blue) that picks its heading freely every step.
//!
//! Both policies see `[cat x, cat y, cat heading, mouse x, mouse y]` with
//! positions divided by `position_scale` and the heading by pi. The cat's
//! output scales to an angular velocity, the mouse's output to an absolute
//! heading. The duel always runs to `steps`; fitness uses the first capture.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::Result;
use crate::model::{rng_from_seed, EnvId, FitnessPair, Genome};
use crate::scalar::Scalar;

use super::{
    cat_mouse_fitness, CatMouseParams, Event, EventKind, Policy, RasterWindow, Trajectory,
};

pub const ENTITIES: [&str; 2] = ["cat", "mouse"];

fn wrap_angle<F: Scalar>(a: F) -> F {
    a.sin().atan2(a.cos())
}

pub(super) fn simulate<F: Scalar>(
    p: &CatMouseParams,
    grid: usize,
    red: &Genome<F>,
    blue: &Genome<F>,
    seed: u64,
) -> Result<(Trajectory<F>, FitnessPair<F>)> {
    let mut rng = rng_from_seed(seed);
    let start_angle = match p.mouse_start_angle {
        Some(a) => a,
        None => rng.random_range(-PI..PI),
    };

    let dt = F::lit(p.dt);
    let pi = F::PI();
    let scale = F::lit(p.position_scale);
    let cat_step = F::lit(p.cat_speed) * dt;
    let mouse_step = F::lit(p.mouse_speed) * dt;
    let turn = F::lit(p.cat_turn_rate) * dt;
    let thresh = F::lit(p.capture_radius);
    let d_init = F::lit(p.initial_distance);
    let ext = F::lit(p.raster_extent);

    let window = RasterWindow {
        min: [-ext, -ext],
        max: [ext, ext],
        grid,
    };
    let mut traj = Trajectory::new(EnvId::CatMouse, &ENTITIES, dt, window, p.steps);
    let mut cat_policy = Policy::new(red);
    let mut mouse_policy = Policy::new(blue);

    let mut cat = [F::zero(), F::zero()];
    let mut heading = F::zero();
    let mut mouse = [
        d_init * F::lit(start_angle.cos()),
        d_init * F::lit(start_angle.sin()),
    ];
    let mut d_min = d_init;
    let mut catch_time = None;

    for step in 0..p.steps {
        let obs = [
            cat[0] / scale,
            cat[1] / scale,
            heading / pi,
            mouse[0] / scale,
            mouse[1] / scale,
        ];
        let a_cat = cat_policy.act(&obs)?;
        let a_mouse = mouse_policy.act(&obs)?;

        heading = wrap_angle(heading + a_cat * turn);
        cat[0] += cat_step * heading.cos();
        cat[1] += cat_step * heading.sin();
        let mouse_heading = a_mouse * pi;
        mouse[0] += mouse_step * mouse_heading.cos();
        mouse[1] += mouse_step * mouse_heading.sin();

        traj.push_row(&[cat, mouse], step)?;

        if catch_time.is_none() {
            let d = (mouse[0] - cat[0]).hypot(mouse[1] - cat[1]);
            d_min = d_min.min(d);
            if d < thresh {
                catch_time = Some(F::lit((step + 1) as f64) * dt);
                traj.events.push(Event {
                    step,
                    kind: EventKind::Capture { entity: 1 },
                });
            }
        }
    }

    let fitness = cat_mouse_fitness(catch_time, d_min, d_init, F::lit(p.t_max()), thresh)?;
    Ok((traj, fitness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{evaluate_duel, EnvParams};
    use crate::model::Side;

    #[test]
    fn capture_on_first_step_scores_one_within_a_step() {
        let mut params = EnvParams::default();
        // mouse just ahead of the cat on its heading, both running +x;
        // the cat closes 0.01 m per step
        params.cat_mouse.initial_distance = 0.205;
        params.cat_mouse.mouse_start_angle = Some(0.0);
        let red = Genome::<f64>::zeros(EnvId::CatMouse, Side::Red);
        let blue = Genome::<f64>::zeros(EnvId::CatMouse, Side::Blue);
        let out = evaluate_duel(EnvId::CatMouse, &params, &red, &blue, 0).unwrap();
        assert!(matches!(
            out.trajectory.events[0],
            Event {
                step: 0,
                kind: EventKind::Capture { entity: 1 }
            }
        ));
        let dt_in_fitness = 0.5 * params.cat_mouse.dt / params.cat_mouse.t_max();
        assert!((out.fitness.red - 1.0).abs() <= dt_in_fitness + 1e-12);
        assert_eq!(out.trajectory.steps(), 500);
    }

    #[test]
    fn fleeing_mouse_is_not_caught_by_idle_cat() {
        let mut params = EnvParams::default();
        params.cat_mouse.mouse_start_angle = Some(std::f64::consts::FRAC_PI_2);
        let red = Genome::<f64>::zeros(EnvId::CatMouse, Side::Red);
        let blue = Genome::<f64>::zeros(EnvId::CatMouse, Side::Blue);
        let out = evaluate_duel(EnvId::CatMouse, &params, &red, &blue, 0).unwrap();
        assert!(out.trajectory.events.is_empty());
        // both run along +x, the cat faster: the gap only grows
        assert_eq!(out.fitness.red, 0.0);
        assert!((out.fitness.red + out.fitness.blue - 1.0).abs() < 1e-9);
    }

    #[test]
    fn heading_wraps() {
        assert!((wrap_angle(3.0 * PI / 2.0) - (-PI / 2.0)).abs() < 1e-12);
        assert!((wrap_angle(0.25f64) - 0.25).abs() < 1e-15);
    }
}
