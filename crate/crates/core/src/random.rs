//! Seeded random inputs for sweeps. The generator is SplitMix64, whose
//! output sequence is fixed by its published algorithm on every platform.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::matrix::Matrix;

pub type SweepRng = SplitMix64;

pub fn rng(seed: u64) -> SweepRng {
    SplitMix64::seed_from_u64(seed)
}

/// Entries uniform in `[-1, 1)`.
pub fn uniform_matrix(rng: &mut SweepRng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::new(rows, cols, data).expect("finite uniform entries")
}

pub fn uniform_vector(rng: &mut SweepRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Random skew-symmetric matrix with strictly-lower entries uniform in `[-1, 1)`.
pub fn skew_matrix(rng: &mut SweepRng, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        for i in j + 1..n {
            let x = rng.random_range(-1.0..1.0);
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    a
}

/// `2 I + U/2` with `U` uniform, which keeps the condition number small.
pub fn well_conditioned(rng: &mut SweepRng, n: usize) -> Matrix {
    &Matrix::identity(n).scale(2.0) + &uniform_matrix(rng, n, n).scale(0.5)
}
