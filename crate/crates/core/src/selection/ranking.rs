use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Normalized rank of every entry: `argsort(argsort(f))` mapped to `[-1, 1]`.
/// Ties keep index order.
pub fn ranking_vector<F: Scalar>(f: &[F]) -> Result<Vec<F>> {
    let n = f.len();
    if n < 2 {
        return Err(Error::usage("ranking vector needs at least two entries"));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::usage("ranking vector of non-finite fitness"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so equal values stay in index order
    order.sort_by(|&a, &b| f[a].partial_cmp(&f[b]).expect("finite"));
    let mut r = vec![F::zero(); n];
    let scale = F::lit(2.0) / F::from_usize(n - 1).unwrap();
    for (rank, &i) in order.iter().enumerate() {
        r[i] = F::from_usize(rank).unwrap() * scale - F::one();
    }
    Ok(r)
}
