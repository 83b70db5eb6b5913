//! Elo ratings from the round-robin's duels, reported as per-side rank
//! percentiles.
//!
//! Every (red, blue, repetition) duel is a match: red scores 1 above 0.5,
//! 0 below and 0.5 on an exact tie. Ratings start equal and are updated
//! with the logistic expectation (base 10, scale 400) over `passes` full
//! passes, each in a fresh seeded shuffle of the match list.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::model::{ctx, derive_seed, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloParams {
    pub initial: f64,
    pub k: f64,
    pub passes: usize,
}

impl Default for EloParams {
    fn default() -> Self {
        Self {
            initial: 1000.0,
            k: 16.0,
            passes: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub red: usize,
    pub blue: usize,
    pub red_fitness: f64,
}

impl Match {
    pub fn red_score(&self) -> f64 {
        if self.red_fitness > 0.5 {
            1.0
        } else if self.red_fitness < 0.5 {
            0.0
        } else {
            0.5
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloTable {
    pub red_ratings: Vec<f64>,
    pub blue_ratings: Vec<f64>,
    /// Rank percentile of each red solution among red solutions.
    pub red_percentiles: Vec<f64>,
    pub blue_percentiles: Vec<f64>,
}

/// Applies `matches` in the given order to the pooled ratings
/// (`red[i]` and `blue[j]`).
pub fn elo_from_matches(red: &mut [f64], blue: &mut [f64], matches: &[Match], k: f64) {
    for m in matches {
        let (ra, rb) = (red[m.red], blue[m.blue]);
        let expected = 1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0));
        let delta = k * (m.red_score() - expected);
        red[m.red] += delta;
        blue[m.blue] -= delta;
    }
}

/// `100 · rank / (n − 1)` with ranks by increasing rating; equal ratings keep
/// index order. A single solution gets 100.
pub fn percentiles(ratings: &[f64]) -> Vec<f64> {
    let n = ratings.len();
    if n == 1 {
        return vec![100.0];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ratings[a].total_cmp(&ratings[b]));
    let mut p = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        p[i] = 100.0 * rank as f64 / (n - 1) as f64;
    }
    p
}

pub fn elo_scores(
    n_red: usize,
    n_blue: usize,
    matches: &[Match],
    params: &EloParams,
    seed: u64,
) -> EloTable {
    let mut red = vec![params.initial; n_red];
    let mut blue = vec![params.initial; n_blue];
    let mut order = matches.to_vec();
    for pass in 0..params.passes {
        let mut rng = rng_from_seed(derive_seed(seed, &[ctx::ELO, pass as u64]));
        order.copy_from_slice(matches);
        order.shuffle(&mut rng);
        elo_from_matches(&mut red, &mut blue, &order, params.k);
    }
    EloTable {
        red_percentiles: percentiles(&red),
        blue_percentiles: percentiles(&blue),
        red_ratings: red,
        blue_ratings: blue,
    }
}
