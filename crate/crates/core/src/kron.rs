//! Kronecker products and sums, dense and matrix-free, plus vectorization and
//! the matrix exponential.
//!
//! Vectors of length `n^k` are read as k-way tensors in lexicographic order:
//! the entry for the 1-based multi-index `(i_1, ..., i_k)` sits at position
//! `rank_r(i_1, ..., i_k)`, which is exactly the layout of
//! `x^1 ⊗ ... ⊗ x^k`.

use crate::error::{Error, Result};
use crate::limits::{checked_pow, Limits};
use crate::matrix::Matrix;

/// A linear map given only by its action on vectors.
pub trait LinearOperator {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Materializes the operator column by column.
    fn to_dense(&self, limits: &Limits) -> Result<Matrix> {
        limits.check_dim("dense operator rows", self.out_dim() as u128)?;
        limits.check_dim("dense operator columns", self.in_dim() as u128)?;
        let mut out = Matrix::zeros(self.out_dim(), self.in_dim());
        let mut e = vec![0.0; self.in_dim()];
        for j in 0..self.in_dim() {
            e[j] = 1.0;
            out.set_column(j, &self.apply(&e)?);
            e[j] = 0.0;
        }
        Ok(out)
    }
}

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::domain(format!(
            "{what}: vector has length {got}, expected {expected}"
        )));
    }
    Ok(())
}

/// Applies `a` (`p x dims[mode]`) along tensor mode `mode` (0-based) of `x`,
/// whose shape is `dims`. The result has shape `dims` with `dims[mode]`
/// replaced by `p`.
pub fn mode_apply(x: &[f64], dims: &[usize], mode: usize, a: &Matrix) -> Vec<f64> {
    let before: usize = dims[..mode].iter().product();
    let d = dims[mode];
    let after: usize = dims[mode + 1..].iter().product();
    assert_eq!(x.len(), before * d * after, "tensor length does not match shape");
    assert_eq!(a.cols(), d, "operator width does not match tensor mode");
    let p = a.rows();
    let mut out = vec![0.0; before * p * after];
    for b in 0..before {
        let xin = &x[b * d * after..(b + 1) * d * after];
        let xout = &mut out[b * p * after..(b + 1) * p * after];
        for r in 0..p {
            let orow = &mut xout[r * after..(r + 1) * after];
            for (j, &arj) in a.row(r).iter().enumerate() {
                if arj == 0.0 {
                    continue;
                }
                for (o, &v) in orow.iter_mut().zip(&xin[j * after..(j + 1) * after]) {
                    *o += arj * v;
                }
            }
        }
    }
    out
}

/// Contracts tensor mode `mode` of `x` (shape `dims`) against `v`, removing
/// that mode.
pub fn mode_contract(x: &[f64], dims: &[usize], mode: usize, v: &[f64]) -> Vec<f64> {
    let before: usize = dims[..mode].iter().product();
    let d = dims[mode];
    let after: usize = dims[mode + 1..].iter().product();
    assert_eq!(x.len(), before * d * after);
    assert_eq!(v.len(), d);
    let mut out = vec![0.0; before * after];
    for b in 0..before {
        let o = &mut out[b * after..(b + 1) * after];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            let xin = &x[(b * d + j) * after..(b * d + j + 1) * after];
            for (oi, &xi) in o.iter_mut().zip(xin) {
                *oi += vj * xi;
            }
        }
    }
    out
}

/// Inserts a new tensor mode at position `mode` carrying `w`: the adjoint of
/// [`mode_contract`]. `dims` is the shape before insertion.
pub fn mode_expand(x: &[f64], dims: &[usize], mode: usize, w: &[f64]) -> Vec<f64> {
    let before: usize = dims[..mode].iter().product();
    let after: usize = dims[mode..].iter().product();
    assert_eq!(x.len(), before * after);
    let d = w.len();
    let mut out = vec![0.0; before * d * after];
    for b in 0..before {
        let xin = &x[b * after..(b + 1) * after];
        for (j, &wj) in w.iter().enumerate() {
            let o = &mut out[(b * d + j) * after..(b * d + j + 1) * after];
            for (oi, &xi) in o.iter_mut().zip(xin) {
                *oi = wj * xi;
            }
        }
    }
    out
}

/// Dense Kronecker product: block `(i, j)` of the result is `a[(i,j)] * b`.
pub fn kron(a: &Matrix, b: &Matrix, limits: &Limits) -> Result<Matrix> {
    let rows = limits.check_dim("kron rows", a.rows() as u128 * b.rows() as u128)?;
    let cols = limits.check_dim("kron columns", a.cols() as u128 * b.cols() as u128)?;
    let (p, q) = b.shape();
    let mut out = vec![0.0; rows * cols];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for r in 0..p {
                let base = (i * p + r) * cols + j * q;
                for (o, &x) in out[base..base + q].iter_mut().zip(b.row(r)) {
                    *o = s * x;
                }
            }
        }
    }
    Ok(Matrix::from_raw(rows, cols, out))
}

fn require_square(what: &str, a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::domain(format!(
            "{what} needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// `a ⊕ b = a ⊗ I_m + I_n ⊗ b`.
pub fn kron_sum(a: &Matrix, b: &Matrix, limits: &Limits) -> Result<Matrix> {
    require_square("kron_sum", a)?;
    require_square("kron_sum", b)?;
    let left = kron(a, &Matrix::identity(b.rows()), limits)?;
    let right = kron(&Matrix::identity(a.rows()), b, limits)?;
    Ok(&left + &right)
}

/// `a^{⊗k} = a^{⊗(k-1)} ⊗ a`, with `a^{⊗1} = a`.
pub fn kron_power(a: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::domain("Kronecker power needs k >= 1"));
    }
    limits.check_power("kron_power rows", a.rows(), k)?;
    limits.check_power("kron_power columns", a.cols(), k)?;
    let mut acc = a.clone();
    for _ in 1..k {
        acc = kron(&acc, a, limits)?;
    }
    Ok(acc)
}

/// Matrix-free `a^{⊗k}` for `a` of shape `n x m`, mapping `m^k -> n^k`.
#[derive(Debug, Clone)]
pub struct KronPowerOp {
    a: Matrix,
    k: usize,
    in_dim: usize,
    out_dim: usize,
}

impl KronPowerOp {
    pub fn new(a: &Matrix, k: usize, limits: &Limits) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("Kronecker power needs k >= 1"));
        }
        let out_dim = limits.check_power("Kronecker power output", a.rows(), k)?;
        let in_dim = limits.check_power("Kronecker power input", a.cols(), k)?;
        Ok(KronPowerOp {
            a: a.clone(),
            k,
            in_dim,
            out_dim,
        })
    }
}

impl LinearOperator for KronPowerOp {
    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("Kronecker power", x.len(), self.in_dim)?;
        let mut dims = vec![self.a.cols(); self.k];
        let mut cur = x.to_vec();
        for mode in 0..self.k {
            cur = mode_apply(&cur, &dims, mode, &self.a);
            dims[mode] = self.a.rows();
        }
        Ok(cur)
    }
}

/// Matrix-free k-th Kronecker sum
/// `sum_{i=1}^k I_{n^{i-1}} ⊗ a ⊗ I_{n^{k-i}}`.
#[derive(Debug, Clone)]
pub struct KronSumOp {
    a: Matrix,
    k: usize,
    dim: usize,
}

impl KronSumOp {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl LinearOperator for KronSumOp {
    fn in_dim(&self) -> usize {
        self.dim
    }

    fn out_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("Kronecker sum", x.len(), self.dim)?;
        let dims = vec![self.a.rows(); self.k];
        let mut out = vec![0.0; self.dim];
        // fixed accumulation order, mode 1 through mode k
        for mode in 0..self.k {
            let term = mode_apply(x, &dims, mode, &self.a);
            for (o, t) in out.iter_mut().zip(term) {
                *o += t;
            }
        }
        Ok(out)
    }
}

/// The k-th Kronecker sum of a square matrix as a matrix-free operator.
pub fn kron_sum_k(a: &Matrix, k: usize, limits: &Limits) -> Result<KronSumOp> {
    require_square("kron_sum_k", a)?;
    if k == 0 {
        return Err(Error::domain("Kronecker sum needs k >= 1"));
    }
    let dim = limits.check_power("Kronecker sum dimension", a.rows(), k)?;
    Ok(KronSumOp {
        a: a.clone(),
        k,
        dim,
    })
}

/// Dense k-th Kronecker sum built from explicit Kronecker products with
/// identities.
pub fn kron_sum_k_dense(a: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    require_square("kron_sum_k", a)?;
    if k == 0 {
        return Err(Error::domain("Kronecker sum needs k >= 1"));
    }
    let n = a.rows();
    let dim = limits.check_power("Kronecker sum dimension", n, k)?;
    let mut acc = Matrix::zeros(dim, dim);
    for i in 0..k {
        let left = Matrix::identity(checked_pow(n, i) as usize);
        let right = Matrix::identity(checked_pow(n, k - 1 - i) as usize);
        let term = kron(&kron(&left, a, limits)?, &right, limits)?;
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Stacks the columns of `a`.
pub fn vec(a: &Matrix) -> Vec<f64> {
    a.transpose().into_data()
}

/// Inverse of [`vec`].
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> Result<Matrix> {
    check_len("unvec", v.len(), rows * cols)?;
    Ok(Matrix::new(cols, rows, v.to_vec())?.transpose())
}

/// Coefficient matrix `b^T ⊕ a` of the equation `a X + X b = C` acting on
/// `vec(X)`.
pub fn vec_solve_form(a: &Matrix, b: &Matrix, limits: &Limits) -> Result<Matrix> {
    require_square("vec_solve_form", a)?;
    require_square("vec_solve_form", b)?;
    kron_sum(&b.transpose(), a, limits)
}

// Degree-13 diagonal Padé coefficients of exp and the matching 1-norm
// threshold (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;
const MAX_SQUARINGS: i32 = 1000;

/// Matrix exponential by scaling and squaring around the [13/13] Padé
/// approximant.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    require_square("expm", a)?;
    let n = a.rows();
    let norm = a.norm_1();
    let s = if norm > THETA13 {
        ((norm / THETA13).log2().ceil() as i32).clamp(0, MAX_SQUARINGS)
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(s));
    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
        &(&a6.scale(c6) + &a4.scale(c4)) + &(&a2.scale(c2) + &id.scale(c0))
    };
    let inner_u = &a6.scale(b[13]) + &(&a4.scale(b[11]) + &a2.scale(b[9]));
    let u = &a * &(&(&a6 * &inner_u) + &lin(b[7], b[5], b[3], b[1]));
    let inner_v = &a6.scale(b[12]) + &(&a4.scale(b[10]) + &a2.scale(b[8]));
    let v = &(&a6 * &inner_v) + &lin(b[6], b[4], b[2], b[0]);
    let mut r = (&v - &u).lu()?.solve_matrix(&(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(r)
}
