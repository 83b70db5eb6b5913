//! Environment-specific fitness rules. Each returns the pair from the red
//! side's perspective (left paddle, cat, pursuers); blue is the complement.

use crate::error::{Error, Result};
use crate::model::FitnessPair;
use crate::scalar::Scalar;

/// Share of points scored by red; a scoreless duel is a tie.
pub fn pong_fitness<F: Scalar>(points_red: u32, points_blue: u32) -> FitnessPair<F> {
    let total = points_red + points_blue;
    if total == 0 {
        return FitnessPair::tie();
    }
    FitnessPair::from_red(F::lit(points_red as f64) / F::lit(total as f64))
}

/// Normalized approach progress: 0 when the closest distance is the starting
/// one, 1 at the capture threshold.
fn progress<F: Scalar>(d_min: F, d_init: F, d_thresh: F) -> Result<F> {
    if d_init <= d_thresh {
        return Err(Error::config(format!(
            "initial distance {d_init} must exceed the capture threshold {d_thresh}"
        )));
    }
    let p = (d_init - d_min) / (d_init - d_thresh);
    Ok(p.max(F::zero()).min(F::one()))
}

/// Cat perspective. Captured: `1 - 0.5 t/T_max` in [0.5, 1]. Escaped:
/// approach progress scaled into [0, 0.5]. Continuous across the two modes.
pub fn cat_mouse_fitness<F: Scalar>(
    catch_time: Option<F>,
    d_min: F,
    d_init: F,
    t_max: F,
    d_thresh: F,
) -> Result<FitnessPair<F>> {
    let half = F::half();
    let f = match catch_time {
        Some(t) => {
            let t = t.max(F::zero()).min(t_max);
            F::one() - half * t / t_max
        }
        None => half * progress(d_min, d_init, d_thresh)?,
    };
    Ok(FitnessPair::from_red(f))
}

/// Pursuer perspective, three disjoint bands:
/// both evaders caught in [0.5, 1], one caught in [0.25, 0.5], none in [0, 0.25].
pub fn pursuit_fitness<F: Scalar>(
    catch_times: [Option<F>; 2],
    d_min: [F; 2],
    d_init: [F; 2],
    t_max: F,
    d_thresh: F,
) -> Result<FitnessPair<F>> {
    let quarter = F::lit(0.25);
    let half = F::half();
    let f = match catch_times {
        [Some(t1), Some(t2)] => {
            let t1 = t1.max(F::zero()).min(t_max);
            let t2 = t2.max(F::zero()).min(t_max);
            half + half * (F::one() - (t1 + t2) / (F::lit(2.0) * t_max))
        }
        [Some(_), None] => quarter + quarter * progress(d_min[1], d_init[1], d_thresh)?,
        [None, Some(_)] => quarter + quarter * progress(d_min[0], d_init[0], d_thresh)?,
        [None, None] => {
            let p0 = progress(d_min[0], d_init[0], d_thresh)?;
            let p1 = progress(d_min[1], d_init[1], d_thresh)?;
            quarter * (p0 + p1) * half
        }
    };
    Ok(FitnessPair::from_red(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pong_examples() {
        assert_eq!(pong_fitness::<f64>(0, 0).red, 0.5);
        assert_eq!(pong_fitness::<f64>(3, 1).red, 0.75);
        assert_eq!(pong_fitness::<f64>(2, 2).red, 0.5);
        assert_eq!(pong_fitness::<f64>(0, 4).blue, 1.0);
    }

    #[test]
    fn cat_mouse_examples() {
        let f = |t, d_min| {
            cat_mouse_fitness::<f64>(t, d_min, 2.0, 5.0, 0.2)
                .unwrap()
                .red
        };
        assert_eq!(f(Some(0.0), 0.1), 1.0);
        assert_eq!(f(Some(5.0), 0.1), 0.5);
        assert_eq!(f(None, 2.0), 0.0);
        assert_eq!(f(None, 0.2), 0.5);
        assert_eq!(f(None, 3.0), 0.0);
    }

    #[test]
    fn cat_mouse_rejects_degenerate_start() {
        assert!(cat_mouse_fitness::<f64>(None, 0.1, 0.2, 5.0, 0.2).is_err());
    }

    #[test]
    fn cat_mouse_continuous_at_mode_boundary() {
        let caught_late = cat_mouse_fitness::<f64>(Some(5.0), 0.0, 2.0, 5.0, 0.2).unwrap();
        let almost = cat_mouse_fitness::<f64>(None, 0.2 + 1e-12, 2.0, 5.0, 0.2).unwrap();
        assert!((caught_late.red - almost.red).abs() < 1e-9);
    }

    #[test]
    fn pursuit_examples() {
        let f = |c, d_min| {
            pursuit_fitness::<f64>(c, d_min, [1.6, 1.6], 5.0, 0.15)
                .unwrap()
                .red
        };
        assert_eq!(f([Some(0.0), Some(0.0)], [0.0, 0.0]), 1.0);
        assert_eq!(f([Some(5.0), Some(5.0)], [0.0, 0.0]), 0.5);
        assert_eq!(f([None, None], [1.6, 1.6]), 0.0);
        assert_eq!(f([Some(1.0), None], [0.0, 0.15]), 0.5);
        assert_eq!(f([None, Some(1.0)], [1.6, 0.0]), 0.25);
        assert_eq!(f([None, None], [0.15, 0.15]), 0.25);
    }

    proptest! {
        #[test]
        fn pursuit_bands_are_disjoint_and_ordered(
            t1 in 0.0f64..=5.0, t2 in 0.0f64..=5.0,
            d0 in 0.15f64..3.0, d1 in 0.15f64..3.0,
            i0 in 0.16f64..3.0, i1 in 0.16f64..3.0,
        ) {
            let both = pursuit_fitness(
                [Some(t1), Some(t2)], [d0, d1], [i0, i1], 5.0, 0.15).unwrap();
            let one = pursuit_fitness([Some(t1), None], [d0, d1], [i0, i1], 5.0, 0.15).unwrap();
            let other = pursuit_fitness([None, Some(t2)], [d0, d1], [i0, i1], 5.0, 0.15).unwrap();
            let none = pursuit_fitness([None, None], [d0, d1], [i0, i1], 5.0, 0.15).unwrap();
            prop_assert!((0.5..=1.0).contains(&both.red));
            prop_assert!((0.25..=0.5).contains(&one.red));
            prop_assert!((0.25..=0.5).contains(&other.red));
            prop_assert!((0.0..=0.25).contains(&none.red));
            for p in [both, one, other, none] {
                prop_assert!((p.red + p.blue - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn cat_mouse_modes(t in 0.0f64..=5.0, d in 0.2f64..4.0, init in 0.21f64..4.0) {
            let caught = cat_mouse_fitness(Some(t), d, init, 5.0, 0.2).unwrap();
            let free = cat_mouse_fitness(None, d, init, 5.0, 0.2).unwrap();
            prop_assert!((0.5..=1.0).contains(&caught.red));
            prop_assert!((0.0..=0.5).contains(&free.red));
            prop_assert!((caught.red + caught.blue - 1.0).abs() < 1e-9);
            prop_assert!((free.red + free.blue - 1.0).abs() < 1e-9);
        }
    }
}
