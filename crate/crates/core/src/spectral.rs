//! Eigenvalue utilities used as spectral oracles.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::indexing::Combinations;
use crate::matrix::Matrix;

/// Eigenvalues of a real square matrix from a real Schur decomposition.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::domain(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let m = Mat::<f64>::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)]);
    let eigs: Vec<Complex64> = m
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite values".into()));
    }
    Ok(eigs)
}

/// Sorts by real part, then imaginary part.
pub fn canonical_sort(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All products `λ_{i_1} ... λ_{i_k}` over increasing index tuples.
pub fn k_products(eigs: &[Complex64], k: usize) -> Vec<Complex64> {
    Combinations::new(eigs.len(), k)
        .map(|c| c.iter().map(|&i| eigs[i - 1]).product())
        .collect()
}

/// All sums `λ_{i_1} + ... + λ_{i_k}` over increasing index tuples.
pub fn k_sums(eigs: &[Complex64], k: usize) -> Vec<Complex64> {
    Combinations::new(eigs.len(), k)
        .map(|c| c.iter().map(|&i| eigs[i - 1]).sum())
        .collect()
}

/// All `n^k` sums over arbitrary index tuples (the spectrum of a k-th
/// Kronecker sum).
pub fn all_k_sums(eigs: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|s| eigs.iter().map(move |e| s + e))
            .collect();
    }
    out
}

/// Greedy multiset comparison: both lists are put in canonical order and
/// each value of `a` is paired with the nearest unused value of `b`.
/// Returns the largest `|a_i - b_j| / max(1, |a_i|)` over the pairing.
pub fn multiset_gap(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "multisets have different sizes {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    canonical_sort(&mut a);
    canonical_sort(&mut b);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in &a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        used[j] = true;
        worst = worst.max(d / x.norm().max(1.0));
    }
    Ok(worst)
}

/// Largest real part.
pub fn abscissa(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}
