//! Adversarial QD-score: the smallest set of opponents such that every
//! solution of the measured set loses (fitness strictly below 0.5) to at
//! least one of them. An exact minimum set cover by iterative deepening,
//! pruned by the greedy cover size.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aqd {
    Count(usize),
    /// Some solution loses to no opponent.
    Unbounded,
}

impl Aqd {
    /// Numeric value with Unbounded as +∞, for ordering and statistics.
    pub fn as_f64(self) -> f64 {
        match self {
            Aqd::Count(n) => n as f64,
            Aqd::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for Aqd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aqd::Count(n) => write!(f, "{n}"),
            Aqd::Unbounded => f.write_str("∞"),
        }
    }
}

/// Row bitsets: for every column, the set rows it defeats.
struct Cover {
    rows: usize,
    words: usize,
    cols: Vec<Vec<u64>>,
}

impl Cover {
    fn new<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> Self {
        let rows = set.len();
        let words = rows.div_ceil(64);
        let n_cols = m[set[0]].len();
        let half = F::half();
        let mut cols = vec![vec![0u64; words]; n_cols];
        for (i, &r) in set.iter().enumerate() {
            for (c, &x) in m[r].iter().enumerate() {
                if x < half {
                    cols[c][i / 64] |= 1 << (i % 64);
                }
            }
        }
        Self { rows, words, cols }
    }

    fn full(&self) -> Vec<u64> {
        let mut v = vec![u64::MAX; self.words];
        let rem = self.rows % 64;
        if rem != 0 {
            v[self.words - 1] = (1u64 << rem) - 1;
        }
        v
    }

    fn first_uncovered(&self, covered: &[u64]) -> Option<usize> {
        let full = self.full();
        for w in 0..self.words {
            let missing = full[w] & !covered[w];
            if missing != 0 {
                return Some(w * 64 + missing.trailing_zeros() as usize);
            }
        }
        None
    }

    fn covers(&self, col: usize, row: usize) -> bool {
        self.cols[col][row / 64] >> (row % 64) & 1 == 1
    }

    /// Depth-limited search branching on the columns that cover the
    /// uncovered row with the fewest options.
    fn search(&self, covered: &mut Vec<u64>, depth: usize) -> bool {
        let full = self.full();
        let missing: Vec<usize> = (0..self.rows)
            .filter(|&r| covered[r / 64] >> (r % 64) & 1 == 0)
            .collect();
        if missing.is_empty() {
            return true;
        }
        if depth == 0 {
            return false;
        }
        let row = *missing
            .iter()
            .min_by_key(|&&r| (0..self.cols.len()).filter(|&c| self.covers(c, r)).count())
            .expect("non-empty");
        debug_assert!(self.first_uncovered(covered).is_some());
        for c in 0..self.cols.len() {
            if !self.covers(c, row) {
                continue;
            }
            let saved = covered.clone();
            for w in 0..self.words {
                covered[w] = (covered[w] | self.cols[c][w]) & full[w];
            }
            if self.search(covered, depth - 1) {
                return true;
            }
            *covered = saved;
        }
        false
    }
}

fn feasible(cover: &Cover) -> bool {
    let mut any = vec![0u64; cover.words];
    for col in &cover.cols {
        for w in 0..cover.words {
            any[w] |= col[w];
        }
    }
    any == cover.full()
}

/// Greedy cover size (most newly covered rows first, lowest column on
/// ties), or `None` when infeasible.
pub fn greedy_cover<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> Option<usize> {
    let cover = Cover::new(m, set);
    if !feasible(&cover) {
        return None;
    }
    let full = cover.full();
    let mut covered = vec![0u64; cover.words];
    let mut size = 0;
    while covered != full {
        let gain = |c: usize| -> u32 {
            (0..cover.words)
                .map(|w| (cover.cols[c][w] & !covered[w]).count_ones())
                .sum()
        };
        let best = (0..cover.cols.len()).fold(0, |b, c| if gain(c) > gain(b) { c } else { b });
        for w in 0..cover.words {
            covered[w] |= cover.cols[best][w];
        }
        size += 1;
    }
    Some(size)
}

pub fn aqd_score<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> Aqd {
    assert!(!set.is_empty(), "measure of an empty set");
    let cover = Cover::new(m, set);
    let Some(upper) = greedy_cover(m, set) else {
        return Aqd::Unbounded;
    };
    for size in 1..upper {
        let mut covered = vec![0u64; cover.words];
        if cover.search(&mut covered, size) {
            return Aqd::Count(size);
        }
    }
    Aqd::Count(upper)
}

/// Exhaustive minimum over all column subsets; for small instances only.
pub fn aqd_score_brute_force<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> Aqd {
    let n_cols = m[set[0]].len();
    assert!(n_cols <= 20, "brute force is limited to 20 columns");
    let half = F::half();
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << n_cols) {
        let size = mask.count_ones() as usize;
        if best.is_some_and(|b| size >= b) {
            continue;
        }
        let ok = set
            .iter()
            .all(|&r| (0..n_cols).any(|c| mask >> c & 1 == 1 && m[r][c] < half));
        if ok {
            best = Some(size);
        }
    }
    best.map_or(Aqd::Unbounded, Aqd::Count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        // r1 loses only to c2; r2 loses to c1 and c3
        let m = vec![vec![0.9, 0.1, 0.7], vec![0.2, 0.6, 0.3]];
        assert_eq!(aqd_score(&m, &[0, 1]), Aqd::Count(2));
        let m = vec![vec![0.9, 0.1], vec![0.6, 0.5]];
        assert_eq!(aqd_score(&m, &[0, 1]), Aqd::Unbounded);
        assert_eq!(Aqd::Unbounded.to_string(), "∞");
    }

    #[test]
    fn greedy_is_an_upper_bound() {
        // greedy takes the 4-row column first and needs three columns; two suffice
        let m = vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ];
        let m: Vec<Vec<f64>> = m
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| if x == 0.0 { 0.2 } else { 0.8 })
                    .collect()
            })
            .collect();
        let set: Vec<usize> = (0..6).collect();
        assert_eq!(aqd_score(&m, &set), aqd_score_brute_force(&m, &set));
        assert!(greedy_cover(&m, &set).unwrap() >= 2);
    }
}
