//! Occupancy-raster behavior descriptor.
//!
//! Every entity's path is binned into a `grid x grid` occupancy histogram over
//! the trajectory's raster window (cells row-major, y rows, x columns;
//! positions outside the window fall into the border cells). Histograms are
//! concatenated in the environment's entity order:
//!
//! * Pong: ball, left paddle, right paddle
//! * Cat-and-mouse: cat, mouse
//! * Pursuers-and-evaders: pursuer 1, pursuer 2, evader 1, evader 2
//!
//! Each entry is the fraction of timesteps spent in that cell, so each
//! entity's histogram sums to one. Both sides receive the same descriptor.

use crate::model::{BehaviorDescriptor, Side};
use crate::scalar::Scalar;

use super::Trajectory;

fn cell<F: Scalar>(v: F, lo: F, hi: F, grid: usize) -> usize {
    let t = (v - lo) / (hi - lo) * F::lit(grid as f64);
    let i = t.floor().to_f64_lossy();
    if i.is_nan() || i < 0.0 {
        0
    } else {
        (i as usize).min(grid - 1)
    }
}

pub fn behavior_descriptor<F: Scalar>(
    trajectory: &Trajectory<F>,
    _perspective: Side,
) -> BehaviorDescriptor<F> {
    let g = trajectory.window.grid;
    let cells = g * g;
    let n_entities = trajectory.entities.len();
    let steps = trajectory.steps();
    let mut counts = vec![0u32; n_entities * cells];
    let (lo, hi) = (trajectory.window.min, trajectory.window.max);
    for step in 0..steps {
        for (e, pos) in trajectory.row(step).iter().enumerate() {
            let ix = cell(pos[0], lo[0], hi[0], g);
            let iy = cell(pos[1], lo[1], hi[1], g);
            counts[e * cells + iy * g + ix] += 1;
        }
    }
    let norm = F::lit(steps.max(1) as f64);
    BehaviorDescriptor(
        counts
            .into_iter()
            .map(|c| F::lit(c as f64) / norm)
            .collect(),
    )
}
