//! Per-replication measures and their median / quartile summaries, laid out
//! like the paper-style tables: one block per side, measures as rows,
//! variants as columns.

use serde::{Deserialize, Serialize};

use super::{aqd_score, coverage, coverage_clusters, elo_scores, expertise, robustness, win_rate};
use super::{Aqd, EloParams, EloTable, FitnessMatrix};
use crate::error::Result;
use crate::model::{ctx, derive_seed, Side};

pub const MEASURE_NAMES: [&str; 6] = [
    "Win rate",
    "ELO Score",
    "Robustness",
    "Coverage",
    "Expertise",
    "AQD-Score",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetMeasures {
    pub win_rate: f64,
    pub elo_score: f64,
    pub robustness: f64,
    pub coverage: f64,
    pub expertise: f64,
    pub aqd_score: Aqd,
}

impl SetMeasures {
    /// Values in [`MEASURE_NAMES`] order, Unbounded AQD as +∞.
    pub fn values(&self) -> [f64; 6] {
        [
            self.win_rate,
            self.elo_score,
            self.robustness,
            self.coverage,
            self.expertise,
            self.aqd_score.as_f64(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub side: Side,
    pub variant: String,
    pub replication: usize,
    pub measures: SetMeasures,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub side: Side,
    pub variant: String,
    pub measure: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub replications: usize,
}

/// Linear-interpolation quantile of sorted values; +∞ propagates only when
/// the interpolation actually reaches it.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of nothing");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else if sorted[hi].is_infinite() {
        f64::INFINITY
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Measures of every (variant, replication) set on one side. Sets are the
/// groups of equally labeled solutions, in order of first appearance.
pub fn side_measures(
    m: &FitnessMatrix,
    side: Side,
    k: usize,
    elo: &EloTable,
    seed: u64,
) -> Result<Vec<MeasureRow>> {
    let view = m.view(side);
    let labels = m.labels(side);
    let side_tag = match side {
        Side::Red => 0,
        Side::Blue => 1,
    };
    let clusters = coverage_clusters(&view, k, derive_seed(seed, &[ctx::COVERAGE, side_tag]))?;
    let pct = match side {
        Side::Red => &elo.red_percentiles,
        Side::Blue => &elo.blue_percentiles,
    };
    let mut groups: Vec<((String, usize), Vec<usize>)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let key = (l.variant.clone(), l.replication);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|((variant, replication), set)| MeasureRow {
            side,
            variant,
            replication,
            measures: SetMeasures {
                win_rate: win_rate(&view, &set),
                elo_score: set
                    .iter()
                    .map(|&i| pct[i])
                    .fold(f64::NEG_INFINITY, f64::max),
                robustness: robustness(&view, &set),
                coverage: coverage(&clusters, &set),
                expertise: expertise(&view, &set),
                aqd_score: aqd_score(&view, &set),
            },
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureTable {
    pub tool_version: String,
    pub plan_hash: String,
    pub env: crate::model::EnvId,
    pub rows: Vec<MeasureRow>,
    pub summary: Vec<MeasureSummary>,
}

impl MeasureTable {
    /// All measures of both sides. `k` is the coverage cluster count (the
    /// runs' task count).
    pub fn build(m: &FitnessMatrix, k: usize, elo_params: &EloParams, seed: u64) -> Result<Self> {
        let elo = elo_scores(m.rows.len(), m.cols.len(), &m.matches(), elo_params, seed);
        let mut rows = side_measures(m, Side::Red, k, &elo, seed)?;
        rows.extend(side_measures(m, Side::Blue, k, &elo, seed)?);
        let mut summary = Vec::new();
        for side in [Side::Red, Side::Blue] {
            for variant in variants(&rows, side) {
                let reps: Vec<&MeasureRow> = rows
                    .iter()
                    .filter(|r| r.side == side && r.variant == variant)
                    .collect();
                for (j, name) in MEASURE_NAMES.iter().enumerate() {
                    let mut v: Vec<f64> = reps.iter().map(|r| r.measures.values()[j]).collect();
                    v.sort_by(f64::total_cmp);
                    summary.push(MeasureSummary {
                        side,
                        variant: variant.clone(),
                        measure: name.to_string(),
                        median: quantile(&v, 0.5),
                        q1: quantile(&v, 0.25),
                        q3: quantile(&v, 0.75),
                        replications: v.len(),
                    });
                }
            }
        }
        Ok(Self {
            tool_version: m.tool_version.clone(),
            plan_hash: m.plan_hash.clone(),
            env: m.env,
            rows,
            summary,
        })
    }

    pub fn summary_of(&self, side: Side, variant: &str, measure: &str) -> Option<&MeasureSummary> {
        self.summary
            .iter()
            .find(|s| s.side == side && s.variant == variant && s.measure == measure)
    }

    fn header(&self) -> String {
        format!(
            "# gameqd {} env={} plan_hash={}\n",
            self.tool_version, self.env, self.plan_hash
        )
    }

    /// Median and quartiles per side, variant and measure. Unbounded values
    /// are written as `null`.
    pub fn summary_csv(&self) -> String {
        let mut s = self.header();
        s.push_str("side,role,variant,measure,median,q1,q3,replications\n");
        for r in &self.summary {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.side,
                self.env.side_name(r.side),
                r.variant,
                r.measure,
                csv_num(r.median),
                csv_num(r.q1),
                csv_num(r.q3),
                r.replications
            ));
        }
        s
    }

    /// One line per side, variant and replication.
    pub fn replications_csv(&self) -> String {
        let mut s = self.header();
        s.push_str("side,role,variant,replication,win_rate,elo_score,robustness,coverage,expertise,aqd_score\n");
        for r in &self.rows {
            let m = &r.measures;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.side,
                self.env.side_name(r.side),
                r.variant,
                r.replication,
                m.win_rate,
                m.elo_score,
                m.robustness,
                m.coverage,
                m.expertise,
                csv_num(m.aqd_score.as_f64())
            ));
        }
        s
    }

    /// Human-readable table: `median [q1, q3]` per measure and variant.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for side in [Side::Red, Side::Blue] {
            let vars = variants(&self.rows, side);
            out.push_str(&format!("{} ({})\n", self.env.side_name(side), side));
            let mut lines = vec![std::iter::once(String::new())
                .chain(vars.iter().cloned())
                .collect::<Vec<_>>()];
            for name in MEASURE_NAMES {
                let mut line = vec![name.to_string()];
                for v in &vars {
                    let s = self
                        .summary_of(side, v, name)
                        .expect("summary for every variant");
                    line.push(format!(
                        "{} [{}, {}]",
                        fmt(name, s.median),
                        fmt(name, s.q1),
                        fmt(name, s.q3)
                    ));
                }
                lines.push(line);
            }
            let widths: Vec<usize> = (0..lines[0].len())
                .map(|c| {
                    lines
                        .iter()
                        .map(|l| l[c].chars().count())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for l in lines {
                let cells: Vec<String> = l
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(c, (x, w))| {
                        let pad = w - x.chars().count();
                        if c == 0 {
                            format!("{x}{}", " ".repeat(pad))
                        } else {
                            format!("{}{x}", " ".repeat(pad))
                        }
                    })
                    .collect();
                out.push_str(cells.join("  ").trim_end());
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

fn variants(rows: &[MeasureRow], side: Side) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    for r in rows.iter().filter(|r| r.side == side) {
        if !v.contains(&r.variant) {
            v.push(r.variant.clone());
        }
    }
    v
}

fn csv_num(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        "null".to_string()
    }
}

fn fmt(measure: &str, x: f64) -> String {
    if x.is_infinite() {
        return "∞".to_string();
    }
    match measure {
        "Win rate" | "ELO Score" | "Coverage" => format!("{x:.1}%"),
        "Robustness" | "Expertise" => format!("{x:.2}"),
        _ => format!("{}", (x * 10.0).round() / 10.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
        assert_eq!(quantile(&[2.0, 3.0, f64::INFINITY], 0.5), 3.0);
        assert_eq!(quantile(&[2.0, 3.0, f64::INFINITY], 0.75), f64::INFINITY);
        assert_eq!(quantile(&[2.0, 3.0, 3.0, 4.0, 10.0], 0.75), 4.0);
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt("Expertise", 0.5), "0.50");
        assert_eq!(fmt("Win rate", 59.84), "59.8%");
        assert_eq!(fmt("AQD-Score", 3.0), "3");
        assert_eq!(fmt("AQD-Score", 3.25), "3.3");
        assert_eq!(fmt("AQD-Score", f64::INFINITY), "∞");
    }
}
