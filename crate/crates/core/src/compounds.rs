//! Multiplicative compounds `A^(k)` and additive compounds `A^[k]`.
//!
//! Each compound has more than one route so that every result can be
//! cross-checked:
//!
//! * `A^(k)`: all k-minors ([`mult_compound_oracle`]) or
//!   `L_{n,k} A^{⊗k} M_{m,k}` ([`mult_compound_kron`]).
//! * `A^[k]`: the entrywise rule ([`add_compound_entrywise`]),
//!   `L_{n,k} A^{⊕k} M_{n,k}` ([`add_compound_kron`]), or the first-order
//!   coefficient of `(I + εA)^(k)` ([`add_compound_eps_limit`]).
//! * `(AB)^[k]` from the columns of `A` and rows of `B` alone
//!   ([`product_add_compound`], [`product_add_compound_2`]).
//!
//! Tensor-side work is matrix-free: memory stays `O(n^k)` per column.

use std::fmt;

use crate::error::{Error, Result};
use crate::indexing::{binomial_usize, rank_q_unchecked, Combinations};
use crate::kron::{kron_sum_k, mode_contract, mode_expand, KronPowerOp, LinearOperator};
use crate::lifting::{build_l, build_m, SignedSelector};
use crate::limits::Limits;
use crate::matrix::Matrix;

/// Pivots at or below this fraction of the minor's largest entry make the
/// minor count as singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Largest 1-norm condition number accepted by [`similarity_compound_check`].
pub const MAX_CONDITION: f64 = 1e8;

/// Which route produced a compound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MinorOracle,
    KronLift,
    Entrywise,
    EpsLimit,
    ProductDecomp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MinorOracle => "minor_oracle",
            Method::KronLift => "kron_lift",
            Method::Entrywise => "entrywise",
            Method::EpsLimit => "eps_limit",
            Method::ProductDecomp => "product_decomp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed compound, the route that produced it, and optionally the
/// measured max-abs gap to a second route.
#[derive(Debug, Clone)]
pub struct CompoundReport {
    pub result: Matrix,
    pub method: Method,
    pub cross_residual: Option<f64>,
}

impl CompoundReport {
    pub fn new(result: Matrix, method: Method) -> Self {
        CompoundReport {
            result,
            method,
            cross_residual: None,
        }
    }

    /// Records the max-abs difference to `other`, keeping the larger value
    /// when called repeatedly.
    pub fn cross_check(mut self, other: &Matrix) -> Result<Self> {
        if other.shape() != self.result.shape() {
            return Err(Error::domain("cross-check shapes differ"));
        }
        let gap = self.result.max_abs_diff(other);
        self.cross_residual = Some(self.cross_residual.map_or(gap, |g| g.max(gap)));
        Ok(self)
    }
}

fn check_k(k: usize, bound: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if k > bound {
        return Err(Error::domain(format!("k = {k} exceeds min(n, m) = {bound}")));
    }
    Ok(())
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

fn compound_shape(n: usize, m: usize, k: usize, limits: &Limits) -> Result<(usize, usize)> {
    let r = limits.check_dim("compound rows", binomial_usize(n, k) as u128)?;
    let c = limits.check_dim("compound columns", binomial_usize(m, k) as u128)?;
    Ok((r, c))
}

/// Determinant of the submatrix of `a` on 0-based `rows` x `cols`:
/// cofactor expansion up to 3x3, partially pivoted elimination beyond.
pub fn minor_det(a: &Matrix, rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    let e = |i: usize, j: usize| a[(rows[i], cols[j])];
    match rows.len() {
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        k => {
            let mut m: Vec<f64> = (0..k * k).map(|p| e(p / k, p % k)).collect();
            let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            let mut det = 1.0;
            for c in 0..k {
                let p = (c..k)
                    .max_by(|&x, &y| m[x * k + c].abs().total_cmp(&m[y * k + c].abs()))
                    .expect("nonempty pivot range");
                let pivot = m[p * k + c];
                if pivot.abs() <= PIVOT_TOL * scale {
                    return 0.0;
                }
                if p != c {
                    for j in 0..k {
                        m.swap(p * k + j, c * k + j);
                    }
                    det = -det;
                }
                det *= pivot;
                for r in c + 1..k {
                    let f = m[r * k + c] / pivot;
                    for j in c + 1..k {
                        m[r * k + j] -= f * m[c * k + j];
                    }
                }
            }
            det
        }
    }
}

/// `A^(k)`: the `C(n,k) x C(m,k)` matrix of all k-minors, rows and columns
/// in lexicographic order.
pub fn mult_compound_oracle(a: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    let (n, m) = a.shape();
    check_k(k, n.min(m))?;
    let (r, c) = compound_shape(n, m, k, limits)?;
    let row_sets: Vec<Vec<usize>> = Combinations::new(n, k)
        .map(|s| s.iter().map(|i| i - 1).collect())
        .collect();
    let col_sets: Vec<Vec<usize>> = Combinations::new(m, k)
        .map(|s| s.iter().map(|i| i - 1).collect())
        .collect();
    let mut out = Matrix::zeros(r, c);
    for (p, rs) in row_sets.iter().enumerate() {
        for (q, cs) in col_sets.iter().enumerate() {
            out[(p, q)] = minor_det(a, rs, cs);
        }
    }
    Ok(out)
}

/// Applies `L * op * M` to every canonical compound basis vector.
fn lift_columns(
    m_sel: &SignedSelector,
    l_sel: &SignedSelector,
    mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<Matrix> {
    let cols = m_sel.cols();
    let mut out = Matrix::zeros(l_sel.rows(), cols);
    let mut lifted = vec![0.0; m_sel.rows()];
    let mut start = 0;
    let trip = m_sel.triplets();
    for q in 0..cols {
        // triplets are sorted by column, so column q is a contiguous run
        let end = start + trip[start..].iter().take_while(|t| t.col == q + 1).count();
        for t in &trip[start..end] {
            lifted[t.row - 1] = f64::from(t.sign);
        }
        let image = op(&lifted)?;
        out.set_column(q, &l_sel.apply(&image)?);
        for t in &trip[start..end] {
            lifted[t.row - 1] = 0.0;
        }
        start = end;
    }
    Ok(out)
}

/// `A^(k) = L_{n,k} A^{⊗k} M_{m,k}`, with `A^{⊗k}` applied as k successive
/// mode contractions.
pub fn mult_compound_kron(a: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    let (n, m) = a.shape();
    check_k(k, n.min(m))?;
    compound_shape(n, m, k, limits)?;
    let op = KronPowerOp::new(a, k, limits)?;
    let m_sel = build_m(m, k, limits)?;
    let l_sel = build_l(n, k, limits)?;
    lift_columns(&m_sel, &l_sel, |x| op.apply(x))
}

/// `A^[k]` entry by entry: diagonal entries are `a_{i1 i1} + ... + a_{ik ik}`;
/// rows `α` and columns `β` that differ only in `i_ℓ ≠ j_m` give
/// `(-1)^(ℓ+m) a_{i_ℓ j_m}`; everything else is zero.
pub fn add_compound_entrywise(a: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    require_square("add_compound_entrywise", a)?;
    let n = a.rows();
    check_k(k, n)?;
    let (r, _) = compound_shape(n, n, k, limits)?;
    let mut out = Matrix::zeros(r, r);
    let mut member = vec![false; n + 1];
    for alpha in Combinations::new(n, k) {
        let p = rank_q_unchecked(n, &alpha) - 1;
        out[(p, p)] = alpha.iter().map(|&i| a[(i - 1, i - 1)]).sum();
        for &i in &alpha {
            member[i] = true;
        }
        for (l, &il) in alpha.iter().enumerate() {
            for j in (1..=n).filter(|&j| !member[j]) {
                let mut beta = alpha.clone();
                beta[l] = j;
                beta.sort_unstable();
                let m_pos = beta.iter().position(|&x| x == j).expect("j was inserted");
                let q = rank_q_unchecked(n, &beta) - 1;
                let sign = if (l + m_pos) % 2 == 0 { 1.0 } else { -1.0 };
                out[(p, q)] = sign * a[(il - 1, j - 1)];
            }
        }
        for &i in &alpha {
            member[i] = false;
        }
    }
    Ok(out)
}

/// `A^[k] = L_{n,k} A^{⊕k} M_{n,k}` with the Kronecker sum applied
/// matrix-free.
pub fn add_compound_kron(a: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    require_square("add_compound_kron", a)?;
    let n = a.rows();
    check_k(k, n)?;
    compound_shape(n, n, k, limits)?;
    let op = kron_sum_k(a, k, limits)?;
    let m_sel = build_m(n, k, limits)?;
    let l_sel = build_l(n, k, limits)?;
    lift_columns(&m_sel, &l_sel, |x| op.apply(x))
}

/// `k + 1` Chebyshev nodes on `[-1/2, 1/2]`.
pub fn default_eps(k: usize) -> Vec<f64> {
    let count = k + 1;
    (0..count)
        .map(|j| {
            0.5 * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * count) as f64).cos()
        })
        .collect()
}

/// Weights `w` with `c_1 = sum_j w_j y_j` for the least-squares degree-`deg`
/// polynomial through `(eps_j, y_j)`: row 1 of the pseudo-inverse of the
/// Vandermonde matrix, via modified Gram-Schmidt.
fn linear_coefficient_weights(eps: &[f64], deg: usize) -> Result<Vec<f64>> {
    let rows = eps.len();
    let cols = deg + 1;
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|d| eps.iter().map(|e| e.powi(d as i32)).collect())
        .collect();
    let mut r = vec![vec![0.0; cols]; cols];
    for j in 0..cols {
        for i in 0..j {
            let dot: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = dot;
            let qi = q[i].clone();
            for (x, y) in q[j].iter_mut().zip(&qi) {
                *x -= dot * y;
            }
        }
        let norm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-13 {
            return Err(Error::Numerical("Vandermonde system is rank deficient".into()));
        }
        r[j][j] = norm;
        for x in &mut q[j] {
            *x /= norm;
        }
    }
    // X = R^{-1} Q^T by back substitution; keep row 1
    let mut x = vec![vec![0.0; rows]; cols];
    for i in (0..cols).rev() {
        for t in 0..rows {
            let s: f64 = (i + 1..cols).map(|j| r[i][j] * x[j][t]).sum();
            x[i][t] = (q[i][t] - s) / r[i][i];
        }
    }
    Ok(x.swap_remove(1))
}

/// `A^[k]` as the `ε^1` coefficient of the degree-k matrix polynomial
/// `(I + εA)^(k)`, fitted from minor-oracle evaluations at `eps_list`.
pub fn add_compound_eps_limit(
    a: &Matrix,
    k: usize,
    eps_list: &[f64],
    limits: &Limits,
) -> Result<Matrix> {
    require_square("add_compound_eps_limit", a)?;
    let n = a.rows();
    check_k(k, n)?;
    let mut distinct = eps_list.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < k + 1 {
        return Err(Error::domain(format!(
            "need at least k + 1 = {} distinct ε values, got {}",
            k + 1,
            distinct.len()
        )));
    }
    if distinct.iter().any(|e| !e.is_finite()) {
        return Err(Error::domain("ε values must be finite"));
    }
    let weights = linear_coefficient_weights(&distinct, k)?;
    let id = Matrix::identity(n);
    let (r, _) = compound_shape(n, n, k, limits)?;
    let mut out = Matrix::zeros(r, r);
    for (eps, w) in distinct.iter().zip(&weights) {
        let c = mult_compound_oracle(&(&id + &a.scale(*eps)), k, limits)?;
        out = &out + &c.scale(*w);
    }
    Ok(out)
}

/// `H_{n,k,i}(v) = I_n ⊗ ... ⊗ v^T ⊗ ... ⊗ I_n` (`v^T` in slot `i`,
/// 1-based), mapping `n^k -> n^{k-1}`. Its adjoint inserts `v` in slot `i`.
#[derive(Debug, Clone)]
pub struct HOperator {
    n: usize,
    k: usize,
    i: usize,
    v: Vec<f64>,
}

/// Builds `H_{n,k,i}(v)`.
pub fn h_operator(n: usize, k: usize, i: usize, v: &[f64], limits: &Limits) -> Result<HOperator> {
    if k == 0 {
        return Err(Error::domain("H operator needs k >= 1"));
    }
    if i < 1 || i > k {
        return Err(Error::domain(format!("slot i = {i} is outside [1, k = {k}]")));
    }
    if v.len() != n {
        return Err(Error::domain(format!(
            "vector has length {}, expected n = {n}",
            v.len()
        )));
    }
    limits.check_power("H operator input", n, k)?;
    Ok(HOperator {
        n,
        k,
        i,
        v: v.to_vec(),
    })
}

impl HOperator {
    pub fn slot(&self) -> usize {
        self.i
    }

    /// `H^T y`: maps `n^{k-1} -> n^k`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        crate::kron::check_len("H adjoint", y.len(), self.n.pow(self.k as u32 - 1))?;
        Ok(mode_expand(y, &vec![self.n; self.k - 1], self.i - 1, &self.v))
    }
}

impl LinearOperator for HOperator {
    fn in_dim(&self) -> usize {
        self.n.pow(self.k as u32)
    }

    fn out_dim(&self) -> usize {
        self.n.pow(self.k as u32 - 1)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::kron::check_len("H operator", x.len(), self.in_dim())?;
        Ok(mode_contract(x, &vec![self.n; self.k], self.i - 1, &self.v))
    }
}

fn check_product_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.cols() != b.rows() || b.cols() != a.rows() {
        return Err(Error::domain(format!(
            "product decomposition needs A n x m and B m x n, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `(AB)^[k] = L_{n,k} sum_i sum_ℓ (-1)^(ℓ+1) H_{n,k,ℓ}(w^i)^T H_{n,k,1}(v^i) M_{n,k}`
/// where `w^i` is column `i` of `A` and `v^i` is row `i` of `B`.
pub fn product_add_compound(a: &Matrix, b: &Matrix, k: usize, limits: &Limits) -> Result<Matrix> {
    check_product_shapes(a, b)?;
    let n = a.rows();
    check_k(k, n)?;
    compound_shape(n, n, k, limits)?;
    let m_sel = build_m(n, k, limits)?;
    let l_sel = build_l(n, k, limits)?;
    let columns: Vec<Vec<f64>> = (0..a.cols()).map(|i| a.column(i)).collect();
    let full = vec![n; k];
    let reduced = vec![n; k - 1];
    lift_columns(&m_sel, &l_sel, |x| {
        let mut acc = vec![0.0; x.len()];
        for (w, v) in columns.iter().zip((0..b.rows()).map(|i| b.row(i))) {
            let contracted = mode_contract(x, &full, 0, v);
            for slot in 0..k {
                let term = mode_expand(&contracted, &reduced, slot, w);
                if slot % 2 == 0 {
                    acc.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
                } else {
                    acc.iter_mut().zip(&term).for_each(|(s, t)| *s -= t);
                }
            }
        }
        Ok(acc)
    })
}

/// `(AB)^[2] = M_{n,2}^T sum_i H_{n,2,1}(w^i)^T H_{n,2,1}(v^i) M_{n,2}`.
pub fn product_add_compound_2(a: &Matrix, b: &Matrix, limits: &Limits) -> Result<Matrix> {
    check_product_shapes(a, b)?;
    let n = a.rows();
    check_k(2, n)?;
    compound_shape(n, n, 2, limits)?;
    let m_sel = build_m(n, 2, limits)?;
    let columns: Vec<Vec<f64>> = (0..a.cols()).map(|i| a.column(i)).collect();
    let mut out = Matrix::zeros(m_sel.cols(), m_sel.cols());
    let mut e = vec![0.0; m_sel.cols()];
    for q in 0..m_sel.cols() {
        e[q] = 1.0;
        let x = m_sel.apply(&e)?;
        e[q] = 0.0;
        let mut acc = vec![0.0; x.len()];
        for (w, v) in columns.iter().zip((0..b.rows()).map(|i| b.row(i))) {
            let term = mode_expand(&mode_contract(&x, &[n, n], 0, v), &[n], 0, w);
            acc.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        }
        out.set_column(q, &m_sel.apply_transpose(&acc)?);
    }
    Ok(out)
}

/// `A^(2) + B^(2) + A^[2] B^[2] - (AB)^[2]`, which equals `(A + B)^(2)`.
pub fn sum_compound2_identity(a: &Matrix, b: &Matrix, limits: &Limits) -> Result<Matrix> {
    require_square("sum_compound2_identity", a)?;
    if a.shape() != b.shape() {
        return Err(Error::domain("A and B must have the same shape"));
    }
    if a.rows() < 2 {
        return Err(Error::domain("sum_compound2_identity needs n >= 2"));
    }
    let a2 = mult_compound_kron(a, 2, limits)?;
    let b2 = mult_compound_kron(b, 2, limits)?;
    let a_add = add_compound_kron(a, 2, limits)?;
    let b_add = add_compound_kron(b, 2, limits)?;
    let ab_add = add_compound_kron(&(a * b), 2, limits)?;
    Ok(&(&(&a2 + &b2) + &(&a_add * &b_add)) - &ab_add)
}

/// Max-abs residual of `(T A T^{-1})^[k] = T^(k) A^[k] (T^(k))^{-1}`, each
/// side computed by a different route.
pub fn similarity_compound_check(t: &Matrix, a: &Matrix, k: usize, limits: &Limits) -> Result<f64> {
    require_square("similarity_compound_check", t)?;
    if a.shape() != t.shape() {
        return Err(Error::domain("T and A must have the same shape"));
    }
    let lu = t.lu()?;
    if lu.is_singular() {
        return Err(Error::Conditioning {
            estimate: f64::INFINITY,
            limit: MAX_CONDITION,
        });
    }
    let t_inv = lu.inverse()?;
    let cond = t.norm_1() * t_inv.norm_1();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Conditioning {
            estimate: cond,
            limit: MAX_CONDITION,
        });
    }
    let lhs = add_compound_kron(&(&(t * a) * &t_inv), k, limits)?;
    let tk = mult_compound_oracle(t, k, limits)?;
    let tk_inv = tk.inverse()?;
    let rhs = &(&tk * &add_compound_entrywise(a, k, limits)?) * &tk_inv;
    Ok(lhs.max_abs_diff(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kron::{kron, kron_sum_k_dense};
    use crate::random::{rng, uniform_matrix, uniform_vector, well_conditioned};

    fn lim() -> Limits {
        Limits::default()
    }

    fn rel(a: &Matrix, b: &Matrix) -> f64 {
        a.max_abs_diff(b) / b.max_abs().max(1.0)
    }

    /// Dense `I ⊗ ... ⊗ v^T ⊗ ... ⊗ I` built from explicit Kronecker products.
    fn dense_h(n: usize, k: usize, i: usize, v: &[f64]) -> Matrix {
        let vt = Matrix::new(1, n, v.to_vec()).unwrap();
        let mut acc: Option<Matrix> = None;
        for slot in 1..=k {
            let f = if slot == i { vt.clone() } else { Matrix::identity(n) };
            acc = Some(match acc {
                None => f,
                Some(m) => kron(&m, &f, &lim()).unwrap(),
            });
        }
        acc.unwrap()
    }

    #[test]
    fn minor_det_matches_lu_for_every_size() {
        let mut g = rng(5);
        for k in 1..=6 {
            let a = uniform_matrix(&mut g, k, k);
            let idx: Vec<usize> = (0..k).collect();
            let d = minor_det(&a, &idx, &idx);
            assert!((d - a.det().unwrap()).abs() < 1e-13, "k = {k}");
        }
        let z = Matrix::from_rows(&[
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(minor_det(&z, &[0, 1, 2, 3], &[0, 1, 2, 3]), 0.0);
    }

    #[test]
    fn diagonal_mult_compound() {
        let d = [2.0, 3.0, 5.0, 7.0];
        let b = Matrix::from_diag(&d).unwrap();
        let expected =
            Matrix::from_diag(&[6.0, 10.0, 14.0, 15.0, 21.0, 35.0]).unwrap();
        assert_eq!(mult_compound_oracle(&b, 2, &lim()).unwrap(), expected);
        assert_eq!(mult_compound_kron(&b, 2, &lim()).unwrap(), expected);
        for n in 1..=5 {
            for k in 1..=n {
                let id = Matrix::identity(n);
                let r = binomial_usize(n, k);
                assert_eq!(mult_compound_oracle(&id, k, &lim()).unwrap(), Matrix::identity(r));
                assert_eq!(mult_compound_kron(&id, k, &lim()).unwrap(), Matrix::identity(r));
            }
        }
    }

    #[test]
    fn mult_compound_three_by_two() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let c = mult_compound_oracle(&a, 2, &lim()).unwrap();
        assert_eq!(c.shape(), (3, 1));
        assert_eq!(c.data(), &[-2.0, -4.0, -2.0]);
        assert_eq!(mult_compound_kron(&a, 2, &lim()).unwrap(), c);
    }

    #[test]
    fn mult_routes_agree_rectangular() {
        let mut g = rng(11);
        let a = uniform_matrix(&mut g, 5, 4);
        for k in 1..=4 {
            let o = mult_compound_oracle(&a, k, &lim()).unwrap();
            let kr = mult_compound_kron(&a, k, &lim()).unwrap();
            assert!(rel(&kr, &o) < 1e-11, "k = {k}");
        }
    }

    #[test]
    fn k_range_errors() {
        let a = Matrix::identity(3);
        assert!(matches!(mult_compound_oracle(&a, 0, &lim()), Err(Error::Domain(_))));
        assert!(matches!(mult_compound_oracle(&a, 4, &lim()), Err(Error::Domain(_))));
        let r = Matrix::zeros(2, 3);
        assert!(add_compound_entrywise(&r, 1, &lim()).is_err());
        assert!(add_compound_kron(&a, 3, &Limits::with_max_dim(26)).is_err());
        let one = Matrix::new(1, 1, vec![4.5]).unwrap();
        assert_eq!(mult_compound_kron(&one, 1, &lim()).unwrap(), one);
        assert_eq!(add_compound_kron(&one, 1, &lim()).unwrap(), one);
    }

    #[test]
    fn diagonal_add_compound() {
        let d = [1.0, 2.0, 3.0, 4.0];
        let b = Matrix::from_diag(&d).unwrap();
        let expected = Matrix::from_diag(&[3.0, 4.0, 5.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!(add_compound_entrywise(&b, 2, &lim()).unwrap(), expected);
        assert_eq!(add_compound_kron(&b, 2, &lim()).unwrap(), expected);
    }

    #[test]
    fn add_compound_extreme_k() {
        let mut g = rng(3);
        let a = uniform_matrix(&mut g, 5, 5);
        assert_eq!(add_compound_entrywise(&a, 1, &lim()).unwrap(), a);
        let top = add_compound_entrywise(&a, 5, &lim()).unwrap();
        assert_eq!(top.shape(), (1, 1));
        assert!((top[(0, 0)] - a.trace()).abs() < 1e-15);
        let kr = add_compound_kron(&a, 5, &lim()).unwrap();
        assert!((kr[(0, 0)] - a.trace()).abs() < 1e-14);
        let eps = add_compound_eps_limit(&a, 5, &default_eps(5), &lim()).unwrap();
        assert!((eps[(0, 0)] - a.trace()).abs() < 1e-10);
        assert_eq!(add_compound_kron(&Matrix::zeros(4, 4), 2, &lim()).unwrap(), Matrix::zeros(6, 6));
    }

    #[test]
    fn entrywise_signs_match_eps_limit() {
        let mut g = rng(17);
        let a = uniform_matrix(&mut g, 5, 5);
        let e = add_compound_entrywise(&a, 2, &lim()).unwrap();
        let o = add_compound_eps_limit(&a, 2, &default_eps(2), &lim()).unwrap();
        assert!(e.max_abs_diff(&o) < 1e-12);
        let k = add_compound_kron(&a, 2, &lim()).unwrap();
        assert!(e.max_abs_diff(&k) < 1e-14);
    }

    #[test]
    fn eps_limit_examples() {
        let mut g = rng(23);
        let a = uniform_matrix(&mut g, 4, 4);
        let eps = [0.1, 0.2, 0.3];
        let o = add_compound_eps_limit(&a, 2, &eps, &lim()).unwrap();
        let e = add_compound_entrywise(&a, 2, &lim()).unwrap();
        assert!(o.max_abs_diff(&e) < 1e-8);
        let id = add_compound_eps_limit(&Matrix::identity(4), 2, &eps, &lim()).unwrap();
        assert!(id.max_abs_diff(&Matrix::identity(6).scale(2.0)) < 1e-12);
        assert!(matches!(
            add_compound_eps_limit(&a, 2, &[0.1, 0.2, 0.2], &lim()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn add_routes_agree_six_by_six() {
        let mut g = rng(29);
        let a = uniform_matrix(&mut g, 6, 6);
        for k in 2..=3 {
            let e = add_compound_entrywise(&a, k, &lim()).unwrap();
            let kr = add_compound_kron(&a, k, &lim()).unwrap();
            assert!(kr.max_abs_diff(&e) < 1e-11);
        }
    }

    #[test]
    fn h_operator_matches_dense_build() {
        let mut g = rng(31);
        let v = uniform_vector(&mut g, 3);
        let x = uniform_vector(&mut g, 27);
        for i in 1..=3 {
            let h = h_operator(3, 3, i, &v, &lim()).unwrap();
            let dense = dense_h(3, 3, i, &v);
            let got = h.apply(&x).unwrap();
            let want = dense.matvec(&x).unwrap();
            let gap = got.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(gap < 1e-13);
            assert_eq!(h.to_dense(&lim()).unwrap().max_abs_diff(&dense) < 1e-15, true);
            let y = uniform_vector(&mut g, 9);
            let adj = h.apply_adjoint(&y).unwrap();
            let want = dense.transpose().matvec(&y).unwrap();
            assert!(adj.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-13));
        }
        assert!(h_operator(3, 3, 0, &v, &lim()).is_err());
        assert!(h_operator(3, 3, 4, &v, &lim()).is_err());
        assert!(h_operator(3, 3, 1, &v[..2], &lim()).is_err());
    }

    #[test]
    fn h_with_canonical_vector_selects_slice() {
        let n = 3;
        let x: Vec<f64> = (0..27).map(f64::from).collect();
        let e2 = [0.0, 1.0, 0.0];
        let h = h_operator(n, 3, 2, &e2, &lim()).unwrap();
        let y = h.apply(&x).unwrap();
        // entries (i, 2, k) in lexicographic order
        let want: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).map(move |k| (i * 9 + 3 + k) as f64))
            .collect();
        assert_eq!(y, want);
    }

    #[test]
    fn h_sign_flip_on_alternating_tensors() {
        let mut g = rng(37);
        let (n, k) = (4, 3);
        let m_sel = build_m(n, k, &lim()).unwrap();
        let v = uniform_vector(&mut g, n);
        let z = uniform_vector(&mut g, binomial_usize(n, k));
        let x = m_sel.apply(&z).unwrap();
        let first = h_operator(n, k, 1, &v, &lim()).unwrap().apply(&x).unwrap();
        for i in 1..=k {
            let hi = h_operator(n, k, i, &v, &lim()).unwrap().apply(&x).unwrap();
            let s = if i % 2 == 1 { 1.0 } else { -1.0 };
            assert!(hi.iter().zip(&first).all(|(a, b)| (a - s * b).abs() < 1e-12));
        }
    }

    #[test]
    fn product_decomposition_examples() {
        let mut g = rng(41);
        let a = uniform_matrix(&mut g, 5, 3);
        let b = uniform_matrix(&mut g, 3, 5);
        let ab = &a * &b;
        for k in 1..=3 {
            let p = product_add_compound(&a, &b, k, &lim()).unwrap();
            let direct = add_compound_kron(&ab, k, &lim()).unwrap();
            assert!(p.max_abs_diff(&direct) < 1e-10, "k = {k}");
        }
        assert!(product_add_compound(&a, &b, 1, &lim()).unwrap().max_abs_diff(&ab) < 1e-14);

        let w = uniform_matrix(&mut g, 4, 1);
        let v = uniform_matrix(&mut g, 1, 4);
        let p = product_add_compound(&w, &v, 2, &lim()).unwrap();
        let e = add_compound_entrywise(&(&w * &v), 2, &lim()).unwrap();
        assert!(p.max_abs_diff(&e) < 1e-11);

        assert!(product_add_compound(&a, &a, 2, &lim()).is_err());
    }

    #[test]
    fn product_decomposition_k2() {
        let mut g = rng(43);
        let a = uniform_matrix(&mut g, 4, 4);
        let b = uniform_matrix(&mut g, 4, 4);
        let p2 = product_add_compound_2(&a, &b, &lim()).unwrap();
        let p = product_add_compound(&a, &b, 2, &lim()).unwrap();
        assert!(p2.max_abs_diff(&p) < 1e-11);

        let id = Matrix::identity(4);
        assert!(product_add_compound_2(&id, &id, &lim())
            .unwrap()
            .max_abs_diff(&Matrix::identity(6).scale(2.0))
            < 1e-15);

        let s = product_add_compound_2(&a, &a.transpose(), &lim()).unwrap();
        assert!(s.max_abs_diff(&s.transpose()) <= 1e-12);
    }

    #[test]
    fn sum_identity_examples() {
        let mut g = rng(47);
        let a = uniform_matrix(&mut g, 2, 2);
        let b = uniform_matrix(&mut g, 2, 2);
        let s = sum_compound2_identity(&a, &b, &lim()).unwrap();
        let rhs = a.det().unwrap() + b.det().unwrap() + a.trace() * b.trace() - (&a * &b).trace();
        assert!((s[(0, 0)] - rhs).abs() < 1e-12);
        assert!((s[(0, 0)] - (&a + &b).det().unwrap()).abs() < 1e-12);

        let a = uniform_matrix(&mut g, 4, 4);
        let z = sum_compound2_identity(&a, &Matrix::zeros(4, 4), &lim()).unwrap();
        assert!(z.max_abs_diff(&mult_compound_oracle(&a, 2, &lim()).unwrap()) < 1e-14);

        let id = Matrix::identity(4);
        let s = sum_compound2_identity(&a, &id, &lim()).unwrap();
        let direct = mult_compound_oracle(&(&a + &id), 2, &lim()).unwrap();
        assert!(s.max_abs_diff(&direct) < 1e-11);
        let expanded = &(&mult_compound_oracle(&a, 2, &lim()).unwrap()
            + &add_compound_entrywise(&a, 2, &lim()).unwrap())
            + &Matrix::identity(6);
        assert!(expanded.max_abs_diff(&direct) < 1e-11);

        assert!(sum_compound2_identity(&Matrix::identity(1), &Matrix::identity(1), &lim()).is_err());
    }

    #[test]
    fn similarity_examples() {
        let mut g = rng(53);
        let a = uniform_matrix(&mut g, 4, 4);
        assert_eq!(similarity_compound_check(&Matrix::identity(4), &a, 2, &lim()).unwrap(), 0.0);
        let t = well_conditioned(&mut g, 4);
        assert!(similarity_compound_check(&t, &a, 2, &lim()).unwrap() <= 1e-8);
        let d = Matrix::from_diag(&[0.5, 1.5, 2.0, 3.0]).unwrap();
        assert!(similarity_compound_check(&d, &a, 2, &lim()).unwrap() <= 1e-10);
        let bad = Matrix::from_diag(&[1.0, 1.0, 1.0, 1e-10]).unwrap();
        assert!(matches!(
            similarity_compound_check(&bad, &a, 2, &lim()),
            Err(Error::Conditioning { .. })
        ));
        let singular = Matrix::zeros(4, 4);
        assert!(similarity_compound_check(&singular, &a, 2, &lim()).is_err());
    }

    #[test]
    fn thm_akk_and_addit_intertwining() {
        // A^{⊗k} M = M A^(k) and A^{⊕k} M = M A^[k], densely
        let mut g = rng(59);
        let a = uniform_matrix(&mut g, 3, 3);
        for k in 1..=3 {
            let m = build_m(3, k, &lim()).unwrap().to_dense(&lim()).unwrap();
            let pow = crate::kron::kron_power(&a, k, &lim()).unwrap();
            let lhs = &pow * &m;
            let rhs = &m * &mult_compound_oracle(&a, k, &lim()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
            let sum = kron_sum_k_dense(&a, k, &lim()).unwrap();
            let lhs = &sum * &m;
            let rhs = &m * &add_compound_entrywise(&a, k, &lim()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        }
    }

    #[test]
    fn report_records_gap() {
        let a = Matrix::identity(2);
        let b = Matrix::from_diag(&[1.0, 1.25]).unwrap();
        let r = CompoundReport::new(a, Method::KronLift).cross_check(&b).unwrap();
        assert_eq!(r.cross_residual, Some(0.25));
        assert_eq!(r.method.as_str(), "kron_lift");
    }
}
