//! Inter-variant round-robin tournament and the adversarial quality and
//! diversity measures computed from its fitness matrix.

mod aqd;
mod elo;
mod quality;
mod table;

pub use aqd::{aqd_score, aqd_score_brute_force, greedy_cover, Aqd};
pub use elo::{elo_from_matches, elo_scores, percentiles, EloParams, EloTable, Match};
pub use quality::{coverage, coverage_clusters, expertise, robustness, win_rate};
pub use table::{
    quantile, side_measures, MeasureRow, MeasureSummary, MeasureTable, SetMeasures, MEASURE_NAMES,
};

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{evaluate_duel, EnvParams};
use crate::error::{Error, Result};
use crate::model::{ctx, derive_seed, EnvId, Genome, Side};
use crate::runner::TOOL_VERSION;
use crate::scalar::Scalar;

/// Identity of a solution in the tournament: its variant, replication and
/// position in that replication's final task set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub variant: String,
    pub replication: usize,
    pub index: usize,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-r{}-t{}", self.variant, self.replication, self.index)
    }
}

/// Red-perspective fitness of every red solution against every blue solution,
/// with each repetition kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessMatrix {
    pub tool_version: String,
    /// Hash of the plan that produced the compared runs.
    pub plan_hash: String,
    pub env: EnvId,
    pub seed: u64,
    pub reps: usize,
    pub rows: Vec<Label>,
    pub cols: Vec<Label>,
    /// `duels[row][col][rep]`.
    pub duels: Vec<Vec<Vec<f64>>>,
}

impl FitnessMatrix {
    /// Builds a matrix from mean values only (one repetition).
    pub fn from_values(rows: Vec<Label>, cols: Vec<Label>, values: Vec<Vec<f64>>) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            plan_hash: String::new(),
            env: EnvId::Pong,
            seed: 0,
            reps: 1,
            rows,
            cols,
            duels: values
                .into_iter()
                .map(|r| r.into_iter().map(|x| vec![x]).collect())
                .collect(),
        }
    }

    pub fn mean(&self, r: usize, c: usize) -> f64 {
        let d = &self.duels[r][c];
        d.iter().sum::<f64>() / d.len() as f64
    }

    /// Mean fitness from the perspective of `side`: rows are that side's
    /// solutions, columns the opponents.
    pub fn view(&self, side: Side) -> Vec<Vec<f64>> {
        match side {
            Side::Red => (0..self.rows.len())
                .map(|r| (0..self.cols.len()).map(|c| self.mean(r, c)).collect())
                .collect(),
            Side::Blue => (0..self.cols.len())
                .map(|c| {
                    (0..self.rows.len())
                        .map(|r| 1.0 - self.mean(r, c))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn labels(&self, side: Side) -> &[Label] {
        match side {
            Side::Red => &self.rows,
            Side::Blue => &self.cols,
        }
    }

    /// Every duel as a match between red row `r` and blue column `c`.
    pub fn matches(&self) -> Vec<Match> {
        let mut out = Vec::new();
        for (r, row) in self.duels.iter().enumerate() {
            for (c, reps) in row.iter().enumerate() {
                for &f in reps {
                    out.push(Match {
                        red: r,
                        blue: c,
                        red_fitness: f,
                    });
                }
            }
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::io::write_json_compact(path, self)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let m: Self = crate::io::read_json(path)?;
        let ok = m.duels.len() == m.rows.len()
            && m.duels.iter().all(|r| {
                r.len() == m.cols.len()
                    && r.iter()
                        .all(|d| d.len() == m.reps && d.iter().all(|x| (0.0..=1.0).contains(x)))
            });
        if !ok {
            return Err(Error::integrity(format!(
                "{}: malformed fitness matrix",
                path.display()
            )));
        }
        Ok(m)
    }

    /// Mean matrix as CSV: a comment line with provenance, a header of blue
    /// labels, then one line per red solution.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# gameqd {} env={} plan_hash={} seed={} reps={}\n",
            self.tool_version, self.env, self.plan_hash, self.seed, self.reps
        );
        s.push_str("red\\blue");
        for c in &self.cols {
            s.push(',');
            s.push_str(&c.to_string());
        }
        s.push('\n');
        for (r, label) in self.rows.iter().enumerate() {
            s.push_str(&label.to_string());
            for c in 0..self.cols.len() {
                s.push_str(&format!(",{}", self.mean(r, c)));
            }
            s.push('\n');
        }
        s
    }
}

/// Plays every red solution against every blue solution `reps` times.
/// Duel seeds are `derive_seed(seed, (ROUND_ROBIN, row, col, rep))`.
pub fn round_robin<F: Scalar>(
    env: EnvId,
    physics: &EnvParams,
    red: &[(Label, &Genome<F>)],
    blue: &[(Label, &Genome<F>)],
    reps: usize,
    seed: u64,
) -> Result<FitnessMatrix> {
    if reps == 0 {
        return Err(Error::usage("round robin needs at least one repetition"));
    }
    for (l, g) in red.iter().chain(blue) {
        if g.env != env {
            return Err(Error::usage(format!(
                "{l} is a {} genome in a {env} tournament",
                g.env
            )));
        }
    }
    let nb = blue.len();
    let cells: Vec<Vec<f64>> = (0..red.len() * nb)
        .into_par_iter()
        .map(|p| {
            let (r, c) = (p / nb, p % nb);
            (0..reps)
                .map(|k| {
                    let s = derive_seed(seed, &[ctx::ROUND_ROBIN, r as u64, c as u64, k as u64]);
                    evaluate_duel(env, physics, red[r].1, blue[c].1, s)
                        .map(|o| o.fitness.red.to_f64_lossy())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut it = cells.into_iter();
    let duels = (0..red.len())
        .map(|_| it.by_ref().take(nb).collect())
        .collect();
    Ok(FitnessMatrix {
        tool_version: TOOL_VERSION.to_string(),
        plan_hash: String::new(),
        env,
        seed,
        reps,
        rows: red.iter().map(|x| x.0.clone()).collect(),
        cols: blue.iter().map(|x| x.0.clone()).collect(),
        duels,
    })
}
