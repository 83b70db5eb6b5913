//! NSGA-III environmental selection (maximization) with sampled reference
//! directions.
//!
//! Normalization uses the ideal point and the per-objective worst value of
//! the candidate set instead of the hyperplane through extreme points; with
//! one reference direction per selected slot this is enough to spread picks
//! across the objective space.
//!
//! Random draws, in order: one `random_range` over the tied least-crowded
//! references per niching step, and one over the reference's members when
//! its niche is already occupied.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::model::rng_from_seed;
use crate::scalar::Scalar;

/// `a` dominates `b` when it is at least as good everywhere and better somewhere.
pub fn dominates<F: Scalar>(a: &[F], b: &[F]) -> bool {
    let mut better = false;
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            better = true;
        }
    }
    better
}

/// Fast non-dominated sort; fronts hold indices in increasing order.
pub fn non_dominated_fronts<F: Scalar, P: AsRef<[F]>>(objs: &[P]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(objs[i].as_ref(), objs[j].as_ref()) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// `count` directions drawn uniformly on the unit simplex of dimension `m`.
pub fn simplex_directions<R: Rng>(count: usize, m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let e: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|x| x / s).collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nsga3Selection {
    pub selected: Vec<usize>,
    pub fronts: Vec<Vec<usize>>,
    /// Index of the front that was split by niching, if any.
    pub split_front: Option<usize>,
}

/// Selects `k` of the objective vectors. Reference directions are sampled
/// from the seeded stream (one per selected slot) before niching starts.
pub fn nsga3_select<F: Scalar, P: AsRef<[F]>>(
    objs: &[P],
    k: usize,
    seed: u64,
) -> Result<Nsga3Selection> {
    let m = objs.first().map_or(0, |o| o.as_ref().len());
    let mut rng = rng_from_seed(seed);
    let refs = simplex_directions(k, m, &mut rng);
    nsga3_select_with(objs, k, &refs, &mut rng)
}

pub fn nsga3_select_with<F: Scalar, P: AsRef<[F]>, R: Rng>(
    objs: &[P],
    k: usize,
    refs: &[Vec<f64>],
    rng: &mut R,
) -> Result<Nsga3Selection> {
    if objs.len() < k {
        return Err(Error::usage(format!(
            "cannot select {k} of {} candidates",
            objs.len()
        )));
    }
    let fronts = non_dominated_fronts(objs);
    let mut selected = Vec::with_capacity(k);
    let mut split = None;
    for (l, front) in fronts.iter().enumerate() {
        if selected.len() + front.len() <= k {
            selected.extend_from_slice(front);
            if selected.len() == k {
                break;
            }
        } else {
            split = Some(l);
            break;
        }
    }
    if let Some(l) = split {
        let last = &fronts[l];
        let need = k - selected.len();
        let chosen = niching(objs, &selected, last, need, refs, rng)?;
        selected.extend(chosen);
    }
    Ok(Nsga3Selection {
        selected,
        fronts,
        split_front: split,
    })
}

fn niching<F: Scalar, P: AsRef<[F]>, R: Rng>(
    objs: &[P],
    chosen: &[usize],
    last: &[usize],
    mut need: usize,
    refs: &[Vec<f64>],
    rng: &mut R,
) -> Result<Vec<usize>> {
    if refs.is_empty() {
        return Err(Error::usage("niching without reference directions"));
    }
    let pool: Vec<usize> = chosen.iter().chain(last).copied().collect();
    let m = objs[pool[0]].as_ref().len();
    let val = |i: usize, d: usize| objs[i].as_ref()[d].to_f64_lossy();

    // translate to a minimization problem anchored at the ideal point
    let ideal: Vec<f64> = (0..m)
        .map(|d| {
            pool.iter()
                .map(|&i| val(i, d))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let span: Vec<f64> = (0..m)
        .map(|d| {
            let w = pool
                .iter()
                .map(|&i| ideal[d] - val(i, d))
                .fold(0.0, f64::max);
            if w > 1e-12 {
                w
            } else {
                1.0
            }
        })
        .collect();
    let normalized =
        |i: usize| -> Vec<f64> { (0..m).map(|d| (ideal[d] - val(i, d)) / span[d]).collect() };

    let associate = |p: &[f64]| -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, w) in refs.iter().enumerate() {
            let ww: f64 = w.iter().map(|x| x * x).sum();
            let t: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / ww;
            let d: f64 = w
                .iter()
                .zip(p)
                .map(|(a, b)| (b - t * a) * (b - t * a))
                .sum::<f64>()
                .sqrt();
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    };

    let mut niche = vec![0usize; refs.len()];
    for &i in chosen {
        niche[associate(&normalized(i)).0] += 1;
    }
    let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); refs.len()];
    for &i in last {
        let (j, d) = associate(&normalized(i));
        members[j].push((i, d));
    }

    let mut active = vec![true; refs.len()];
    let mut out = Vec::with_capacity(need);
    while need > 0 {
        let min = (0..refs.len())
            .filter(|&j| active[j])
            .map(|j| niche[j])
            .min()
            .expect("members remain while picks are needed");
        let tied: Vec<usize> = (0..refs.len())
            .filter(|&j| active[j] && niche[j] == min)
            .collect();
        let j = tied[rng.random_range(0..tied.len())];
        if members[j].is_empty() {
            active[j] = false;
            continue;
        }
        let pos = if niche[j] == 0 {
            let mut best = 0;
            for (p, &(_, d)) in members[j].iter().enumerate() {
                if d < members[j][best].1 {
                    best = p;
                }
            }
            best
        } else {
            rng.random_range(0..members[j].len())
        };
        out.push(members[j].remove(pos).0);
        niche[j] += 1;
        need -= 1;
    }
    Ok(out)
}
