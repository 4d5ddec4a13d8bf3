//! The signed selector matrices `M_{n,k}` (`n^k x C(n,k)`) and `L_{n,k}`
//! (`C(n,k) x n^k`) linking compound coordinates with alternating tensors,
//! and the vec/vech bridge for skew-symmetric matrices.

use crate::error::{Error, Result};
use crate::indexing::{
    binomial_usize, inversion_sign, next_permutation, rank_q_unchecked, rank_r0_unchecked,
    Combinations,
};
use crate::kron::check_len;
use crate::limits::Limits;
use crate::matrix::Matrix;

/// One nonzero entry of a [`SignedSelector`]; `row` and `col` are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub sign: i8,
}

/// Sparse matrix with entries in `{-1, 0, +1}`, immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSelector {
    rows: usize,
    cols: usize,
    triplets: Vec<Triplet>,
}

impl SignedSelector {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    /// `S x` by scatter; every output is a copy or negation of one input
    /// when rows carry at most one nonzero.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("selector apply", x.len(), self.cols)?;
        let mut out = vec![0.0; self.rows];
        for t in &self.triplets {
            let v = x[t.col - 1];
            out[t.row - 1] += if t.sign > 0 { v } else { -v };
        }
        Ok(out)
    }

    /// `S^T y` by gather.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("selector transpose apply", y.len(), self.rows)?;
        let mut out = vec![0.0; self.cols];
        for t in &self.triplets {
            let v = y[t.row - 1];
            out[t.col - 1] += if t.sign > 0 { v } else { -v };
        }
        Ok(out)
    }

    pub fn transpose(&self) -> SignedSelector {
        let mut triplets: Vec<Triplet> = self
            .triplets
            .iter()
            .map(|t| Triplet {
                row: t.col,
                col: t.row,
                sign: t.sign,
            })
            .collect();
        triplets.sort_unstable_by_key(|t| (t.row, t.col));
        SignedSelector {
            rows: self.cols,
            cols: self.rows,
            triplets,
        }
    }

    pub fn to_dense(&self, limits: &Limits) -> Result<Matrix> {
        limits.check_dim("dense selector rows", self.rows as u128)?;
        limits.check_dim("dense selector columns", self.cols as u128)?;
        let mut m = Matrix::zeros(self.rows, self.cols);
        for t in &self.triplets {
            m[(t.row - 1, t.col - 1)] += f64::from(t.sign);
        }
        Ok(m)
    }

    /// Integer product `self * rhs`, row-major `self.rows x rhs.cols`.
    pub fn product_i64(&self, rhs: &SignedSelector) -> Result<Vec<i64>> {
        if self.cols != rhs.rows {
            return Err(Error::domain(format!(
                "cannot multiply selectors {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut by_row: Vec<Vec<(usize, i64)>> = vec![Vec::new(); rhs.rows];
        for t in &rhs.triplets {
            by_row[t.row - 1].push((t.col - 1, i64::from(t.sign)));
        }
        let mut out = vec![0i64; self.rows * rhs.cols];
        for t in &self.triplets {
            for &(c, s) in &by_row[t.col - 1] {
                out[(t.row - 1) * rhs.cols + c] += i64::from(t.sign) * s;
            }
        }
        Ok(out)
    }
}

fn check_nk(n: usize, k: usize, limits: &Limits) -> Result<usize> {
    if k < 1 || k > n {
        return Err(Error::domain(format!("k = {k} must lie in [1, n = {n}]")));
    }
    limits.check_power(&format!("lifting dimension {n}^{k}"), n, k)
}

/// `M_{n,k}`: for every increasing `i` and every permutation `j` of it, the
/// entry `(rank_r(j), rank_q(i))` equals the signature of `j`. Triplets are
/// sorted by `(col, row)`.
pub fn build_m(n: usize, k: usize, limits: &Limits) -> Result<SignedSelector> {
    let rows = check_nk(n, k, limits)?;
    let cols = binomial_usize(n, k);
    let mut triplets = Vec::new();
    for comb in Combinations::new(n, k) {
        let col = rank_q_unchecked(n, &comb);
        let mut perm = comb.clone();
        loop {
            triplets.push(Triplet {
                row: rank_r0_unchecked(n, &perm) + 1,
                col,
                sign: inversion_sign(&perm),
            });
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    triplets.sort_unstable_by_key(|t| (t.col, t.row));
    Ok(SignedSelector {
        rows,
        cols,
        triplets,
    })
}

/// `L_{n,k}`: a single `+1` at `(rank_q(i), rank_r(i))` for every increasing
/// `i`. Triplets are sorted by `(row, col)`.
pub fn build_l(n: usize, k: usize, limits: &Limits) -> Result<SignedSelector> {
    let cols = check_nk(n, k, limits)?;
    let rows = binomial_usize(n, k);
    let mut triplets: Vec<Triplet> = Combinations::new(n, k)
        .map(|comb| Triplet {
            row: rank_q_unchecked(n, &comb),
            col: rank_r0_unchecked(n, &comb) + 1,
            sign: 1,
        })
        .collect();
    triplets.sort_unstable_by_key(|t| (t.row, t.col));
    Ok(SignedSelector {
        rows,
        cols,
        triplets,
    })
}

/// `M_{n,k} x` for `x` of length `C(n,k)`.
pub fn apply_m(n: usize, k: usize, x: &[f64], limits: &Limits) -> Result<Vec<f64>> {
    build_m(n, k, limits)?.apply(x)
}

/// `L_{n,k} y` for `y` of length `n^k`.
pub fn apply_l(n: usize, k: usize, y: &[f64], limits: &Limits) -> Result<Vec<f64>> {
    build_l(n, k, limits)?.apply(y)
}

/// Tolerance on `‖A + A^T‖_∞ / ‖A‖_∞` for a matrix to count as skew.
pub const SKEW_TOL: f64 = 1e-12;

/// `‖A + A^T‖_∞` for a square matrix.
pub fn skew_defect(a: &Matrix) -> f64 {
    (a + &a.transpose()).norm_inf()
}

/// Half-vectorization of a skew-symmetric matrix: the strictly lower
/// triangle stacked column by column.
pub fn vech_skew(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::domain(format!(
            "vech_skew needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let defect = skew_defect(a);
    if defect > SKEW_TOL * a.norm_inf() {
        return Err(Error::domain(format!(
            "vech_skew precondition: matrix is not skew-symmetric, ‖A + A^T‖∞ = {defect:.3e}"
        )));
    }
    let n = a.rows();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for i in j + 1..n {
            out.push(a[(i, j)]);
        }
    }
    Ok(out)
}

/// Inverse of [`vech_skew`]; the dimension is recovered from `v.len() = C(n,2)`.
pub fn unvech_skew(v: &[f64]) -> Result<Matrix> {
    let mut n = 1usize;
    while n * (n - 1) / 2 < v.len() {
        n += 1;
    }
    if n * (n - 1) / 2 != v.len() {
        return Err(Error::domain(format!(
            "length {} is not a triangular number C(n,2)",
            v.len()
        )));
    }
    let mut a = Matrix::zeros(n, n);
    let mut it = v.iter();
    for j in 0..n {
        for i in j + 1..n {
            let x = *it.next().expect("length checked");
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    Ok(a)
}
