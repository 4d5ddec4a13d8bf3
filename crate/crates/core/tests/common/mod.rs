#![allow(dead_code)]

use compoundkit::random::{rng, uniform_matrix, SweepRng};
use compoundkit::Matrix;

pub fn sample(seed: u64) -> SweepRng {
    rng(seed)
}

pub fn random(r: &mut SweepRng, rows: usize, cols: usize) -> Matrix {
    uniform_matrix(r, rows, cols)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Plain triple-loop Kronecker product.
pub fn kron_oracle(a: &Matrix, b: &Matrix) -> Matrix {
    let (p, q) = b.shape();
    let mut out = Matrix::zeros(a.rows() * p, a.cols() * q);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            for r in 0..p {
                for s in 0..q {
                    out[(i * p + r, j * q + s)] = a[(i, j)] * b[(r, s)];
                }
            }
        }
    }
    out
}

/// Kronecker product of column vectors, first factor most significant.
pub fn kron_vectors(vs: &[&[f64]]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for v in vs {
        acc = acc.iter().flat_map(|a| v.iter().map(move |x| a * x)).collect();
    }
    acc
}

/// All permutations of 0..k with their signs, by Heap-free recursion.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    if k == 0 {
        return vec![(vec![], 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            let moved = (p.len() - pos) as i32;
            out.push((q, s * (-1f64).powi(moved)));
        }
    }
    out
}

/// Leibniz determinant.
pub fn leibniz(a: &Matrix) -> f64 {
    let n = a.rows();
    permutations(n)
        .iter()
        .map(|(p, s)| s * (0..n).map(|i| a[(i, p[i])]).product::<f64>())
        .sum()
}

/// Lexicographic k-subsets of 0..n.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut vec![], &mut out);
    out
}

/// Vector of maximal minors of an `n x k` matrix.
pub fn minor_vector(x: &Matrix) -> Vec<f64> {
    let (n, k) = x.shape();
    subsets(n, k)
        .iter()
        .map(|rows| {
            let sub: Vec<Vec<f64>> = rows
                .iter()
                .map(|&r| (0..k).map(|c| x[(r, c)]).collect())
                .collect();
            leibniz(&Matrix::from_rows(&sub).unwrap())
        })
        .collect()
}

/// Antisymmetrized tensor `sum_sigma sign * x^{j1} ⊗ ... ⊗ x^{jk}`.
pub fn wedge_tensor(x: &Matrix) -> Vec<f64> {
    let k = x.cols();
    let cols: Vec<Vec<f64>> = (0..k).map(|j| x.column(j)).collect();
    let mut acc = vec![0.0; x.rows().pow(k as u32)];
    for (p, s) in permutations(k) {
        let factors: Vec<&[f64]> = p.iter().map(|&j| cols[j].as_slice()).collect();
        for (a, t) in acc.iter_mut().zip(kron_vectors(&factors)) {
            *a += s * t;
        }
    }
    acc
}
