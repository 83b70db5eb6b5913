//! Set measures over a perspective matrix: `m[row][col]` is the fitness of
//! the evaluated side's solution `row` against opponent `col`, and `set`
//! selects the rows being measured. Wins are strictly above 0.5.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::{kmeans, ranking_vector};

fn check<F>(m: &[Vec<F>], set: &[usize]) {
    assert!(!set.is_empty(), "measure of an empty set");
    assert!(set.iter().all(|&r| r < m.len()), "set index out of range");
}

/// Best per-row share of strict wins, in percent.
pub fn win_rate<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> F {
    check(m, set);
    let half = F::half();
    set.iter()
        .map(|&r| {
            let wins = m[r].iter().filter(|&&x| x > half).count();
            F::lit(100.0) * F::from_usize(wins).unwrap() / F::from_usize(m[r].len()).unwrap()
        })
        .fold(F::zero(), F::max)
}

/// Best worst-case fitness.
pub fn robustness<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> F {
    check(m, set);
    set.iter()
        .map(|&r| m[r].iter().copied().fold(F::infinity(), F::min))
        .fold(F::neg_infinity(), F::max)
}

/// Worst opponent's best counter within the set.
pub fn expertise<F: Scalar>(m: &[Vec<F>], set: &[usize]) -> F {
    check(m, set);
    (0..m[set[0]].len())
        .map(|c| set.iter().map(|&r| m[r][c]).fold(F::neg_infinity(), F::max))
        .fold(F::infinity(), F::min)
}

/// Cluster of every row: k-means over the rows' normalized ranking vectors.
pub fn coverage_clusters<F: Scalar>(m: &[Vec<F>], k: usize, seed: u64) -> Result<Vec<usize>> {
    if m.len() < k {
        return Err(Error::usage(format!(
            "coverage with k = {k} needs at least {k} solutions, got {}",
            m.len()
        )));
    }
    let ranks: Vec<Vec<F>> = m.iter().map(|r| ranking_vector(r)).collect::<Result<_>>()?;
    Ok(kmeans(&ranks, k, seed)?.assignments)
}

/// Share of distinct clusters among the set's members, in percent.
pub fn coverage(clusters: &[usize], set: &[usize]) -> f64 {
    assert!(!set.is_empty(), "measure of an empty set");
    let mut seen: Vec<usize> = set.iter().map(|&r| clusters[r]).collect();
    seen.sort_unstable();
    seen.dedup();
    100.0 * seen.len() as f64 / set.len() as f64
}
