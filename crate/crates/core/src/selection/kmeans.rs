//! Lloyd's k-means with k-means++ seeding.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::rng_from_seed;
use crate::scalar::{sq_dist, Scalar};

pub const MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeans<F> {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<F>>,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<F>,
    pub iterations: usize,
}

impl<F: Scalar> KMeans<F> {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn nearest<F: Scalar>(centroids: &[Vec<F>], p: &[F]) -> (usize, F) {
    let mut best = (0, sq_dist(&centroids[0], p));
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(c, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// k-means++ initial centers. When every remaining point coincides with a
/// chosen center the next center is drawn uniformly.
fn seed_centers<F: Scalar, P: AsRef<[F]>, R: Rng>(
    points: &[P],
    k: usize,
    rng: &mut R,
) -> Vec<Vec<F>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].as_ref().to_vec()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(&centers[0], p.as_ref()).to_f64_lossy())
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            if d2[pick] == 0.0 {
                // rounding walked past the last positive weight
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap();
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].as_ref().to_vec();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(&c, p.as_ref()).to_f64_lossy());
        }
        centers.push(c);
    }
    centers
}

pub fn kmeans<F: Scalar, P: AsRef<[F]>>(points: &[P], k: usize, seed: u64) -> Result<KMeans<F>> {
    if k == 0 {
        return Err(Error::usage("k-means with k = 0"));
    }
    if points.len() < k {
        return Err(Error::usage(format!(
            "k-means with k = {k} on {} points",
            points.len()
        )));
    }
    let dim = points[0].as_ref().len();
    let mut rng = rng_from_seed(seed);
    let mut centroids = seed_centers(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut objective = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        let mut cost = F::zero();
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(&centroids, p.as_ref());
            cost += d;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        objective.push(cost);
        if !changed {
            break;
        }

        let mut sums = vec![vec![F::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, &x) in sums[a].iter_mut().zip(p.as_ref()) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = F::one() / F::from_usize(counts[c]).unwrap();
                centroids[c] = sums[c].iter().map(|&s| s * inv).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // farthest point from its own centroid, lowest index on ties
                let mut far = 0;
                let mut far_d = F::neg_infinity();
                for (i, p) in points.iter().enumerate() {
                    let d = sq_dist(&centroids[assignments[i]], p.as_ref());
                    if d > far_d {
                        far = i;
                        far_d = d;
                    }
                }
                centroids[c] = points[far].as_ref().to_vec();
            }
        }
    }
    Ok(KMeans {
        assignments,
        centroids,
        objective,
        iterations,
    })
}
