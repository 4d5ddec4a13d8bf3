//! Compound-space dynamics: parallelotope volumes, k-compound flows of
//! linear time-varying systems, k-contraction tests and the skew Lyapunov
//! flow `Ẋ = AX + XA^T`.
//!
//! Integration is classical fixed-step RK4 starting at `t = 0`. The step
//! count is `ceil(T / dt)` and the step is shrunk to land exactly on `T`.

use std::fmt;
use std::sync::Arc;

use crate::compounds::{add_compound_entrywise, mult_compound_oracle};
use crate::error::{Error, Result};
use crate::lifting::{skew_defect, unvech_skew, vech_skew, SKEW_TOL};
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::spectral::{abscissa, eigenvalues, k_sums};

/// Most RK4 steps a single integration may take.
pub const MAX_STEPS: f64 = 1e7;

/// Relative gap allowed between the two spectral abscissa routes.
pub const SPECTRAL_GAP_TOL: f64 = 1e-7;

type Coefficient = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;

/// `ẋ = A(t) x` on `[0, T]`.
#[derive(Clone)]
pub struct LtvSystem {
    n: usize,
    coefficient: Coefficient,
    horizon: f64,
}

impl LtvSystem {
    pub fn new(
        n: usize,
        horizon: f64,
        coefficient: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("system dimension must be positive"));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::domain(format!("horizon must be finite and >= 0, got {horizon}")));
        }
        Ok(LtvSystem {
            n,
            coefficient: Arc::new(coefficient),
            horizon,
        })
    }

    /// A time-invariant system `A(t) = a`.
    pub fn constant(a: &Matrix, horizon: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::domain("system matrix must be square"));
        }
        let a = a.clone();
        Self::new(a.rows(), horizon, move |_| a.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `A(t)`, checked to be `n x n`.
    pub fn coefficient(&self, t: f64) -> Result<Matrix> {
        let a = (self.coefficient)(t);
        if a.shape() != (self.n, self.n) {
            return Err(Error::domain(format!(
                "coefficient at t = {t} is {}x{}, expected {n}x{n}",
                a.rows(),
                a.cols(),
                n = self.n
            )));
        }
        Ok(a)
    }
}

impl fmt::Debug for LtvSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LtvSystem")
            .field("n", &self.n)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

/// `k` generators in `R^n`, stored as the columns of an `n x k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Parallelotope {
    generators: Matrix,
}

impl Parallelotope {
    pub fn new(generators: Matrix) -> Result<Self> {
        let (n, k) = generators.shape();
        if k == 0 || k > n {
            return Err(Error::domain(format!(
                "a parallelotope needs 1 <= k <= n generators, got k = {k}, n = {n}"
            )));
        }
        Ok(Parallelotope { generators })
    }

    pub fn generators(&self) -> &Matrix {
        &self.generators
    }

    pub fn n(&self) -> usize {
        self.generators.rows()
    }

    pub fn k(&self) -> usize {
        self.generators.cols()
    }

    /// The compound vector `V^(k)`, of length `C(n, k)`.
    pub fn compound_vector(&self, limits: &Limits) -> Result<Vec<f64>> {
        Ok(mult_compound_oracle(&self.generators, self.k(), limits)?.into_data())
    }
}

fn norm2(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// k-volume of the parallelotope: `|V^(k)|_2`.
pub fn parallelotope_volume(p: &Parallelotope, limits: &Limits) -> Result<f64> {
    Ok(norm2(&p.compound_vector(limits)?))
}

/// Step count and step length covering `[0, horizon]`.
pub fn step_plan(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain(format!("dt must be finite and positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::domain(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    let ratio = horizon / dt;
    if ratio > MAX_STEPS {
        return Err(Error::resource("integration steps", ratio.ceil() as u128, MAX_STEPS as u128));
    }
    if horizon == 0.0 {
        return Ok((0, 0.0));
    }
    // absorb representation noise so T = 1, dt = 1e-3 gives 1000 steps
    let near = ratio.round();
    let steps = if (ratio - near).abs() <= 1e-9 * near { near } else { ratio.ceil() };
    let steps = steps.max(1.0) as usize;
    Ok((steps, horizon / steps as f64))
}

/// Classical RK4 for `ẋ = f(t, x)` on `[0, horizon]`. `observe` sees the
/// initial state and the state after every step.
pub fn rk4(
    x0: Vec<f64>,
    horizon: f64,
    dt: f64,
    mut f: impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    mut observe: impl FnMut(f64, &[f64]),
) -> Result<Vec<f64>> {
    let (steps, h) = step_plan(horizon, dt)?;
    let mut x = x0;
    observe(0.0, &x);
    let axpy = |x: &[f64], s: f64, d: &[f64]| -> Vec<f64> {
        x.iter().zip(d).map(|(a, b)| a + s * b).collect()
    };
    for step in 0..steps {
        let t = step as f64 * h;
        let k1 = f(t, &x)?;
        let k2 = f(t + h / 2.0, &axpy(&x, h / 2.0, &k1))?;
        let k3 = f(t + h / 2.0, &axpy(&x, h / 2.0, &k2))?;
        let k4 = f(t + h, &axpy(&x, h, &k3))?;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if step + 1 == steps { horizon } else { (step + 1) as f64 * h };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("state became non-finite at t = {t_next}")));
        }
        observe(t_next, &x);
    }
    Ok(x)
}

/// Sampled compound trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundSeries {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub volumes: Vec<f64>,
}

impl CompoundSeries {
    fn push(&mut self, t: f64, z: &[f64]) {
        self.times.push(t);
        self.states.push(z.to_vec());
        self.volumes.push(norm2(z));
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest entrywise gap to another series sampled at the same times.
    pub fn max_gap(&self, other: &CompoundSeries) -> Result<f64> {
        if self.states.len() != other.states.len() {
            return Err(Error::domain("series have different lengths"));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }
}

fn check_generators(sys: &LtvSystem, p0: &Parallelotope) -> Result<()> {
    if p0.n() != sys.n() {
        return Err(Error::domain(format!(
            "generators live in R^{}, system in R^{}",
            p0.n(),
            sys.n()
        )));
    }
    Ok(())
}

/// Integrates `ż = A(t)^[k] z` from `z(0) = V0^(k)`.
pub fn evolve_compound(
    sys: &LtvSystem,
    p0: &Parallelotope,
    dt: f64,
    limits: &Limits,
) -> Result<CompoundSeries> {
    check_generators(sys, p0)?;
    let k = p0.k();
    let z0 = p0.compound_vector(limits)?;
    let mut series = CompoundSeries {
        times: Vec::new(),
        states: Vec::new(),
        volumes: Vec::new(),
    };
    rk4(
        z0,
        sys.horizon(),
        dt,
        |t, z| add_compound_entrywise(&sys.coefficient(t)?, k, limits)?.matvec(z),
        |t, z| series.push(t, z),
    )?;
    Ok(series)
}

/// Integrates each generator under `ẋ = A(t) x` and takes the compound of
/// the evolved generators at every step.
pub fn evolve_generators(
    sys: &LtvSystem,
    p0: &Parallelotope,
    dt: f64,
    limits: &Limits,
) -> Result<CompoundSeries> {
    check_generators(sys, p0)?;
    let (n, k) = (p0.n(), p0.k());
    let mut series = CompoundSeries {
        times: Vec::new(),
        states: Vec::new(),
        volumes: Vec::new(),
    };
    let mut failure = None;
    rk4(
        p0.generators().data().to_vec(),
        sys.horizon(),
        dt,
        |t, x| {
            let v = Matrix::new(n, k, x.to_vec())?;
            Ok(sys.coefficient(t)?.matmul(&v)?.into_data())
        },
        |t, x| {
            let v = Matrix::from_raw(n, k, x.to_vec());
            match mult_compound_oracle(&v, k, limits) {
                Ok(z) => series.push(t, z.data()),
                Err(e) => failure = failure.take().or(Some(e)),
            }
        },
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(series),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Contractive,
    NotContractive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Contractive => "contractive",
            Verdict::NotContractive => "not_contractive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub verdict: Verdict,
    /// Largest real part in the spectrum of `A^[k]`.
    pub abscissa: f64,
    /// Largest real part over all sums of `k` distinct eigenvalues of `A`.
    pub eigen_sum_abscissa: f64,
}

/// Decides whether `A^[k]` is Hurwitz, from its spectrum and, as a check,
/// from the k-sums of the spectrum of `A`.
pub fn k_contraction_test(a: &Matrix, k: usize, limits: &Limits) -> Result<ContractionReport> {
    let compound = add_compound_entrywise(a, k, limits)?;
    let alpha = abscissa(&eigenvalues(&compound)?);
    let beta = abscissa(&k_sums(&eigenvalues(a)?, k));
    let gap = (alpha - beta).abs();
    if gap > SPECTRAL_GAP_TOL * alpha.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "spectral abscissa routes disagree: {alpha} vs {beta}"
        )));
    }
    let verdict = if alpha < 0.0 {
        Verdict::Contractive
    } else {
        Verdict::NotContractive
    };
    Ok(ContractionReport {
        verdict,
        abscissa: alpha,
        eigen_sum_abscissa: beta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewFlow {
    pub times: Vec<f64>,
    /// `X(t)` rebuilt from `v̇ = A^[2] v`.
    pub states: Vec<Matrix>,
    /// `X(t)` from integrating `Ẋ = AX + XA^T` directly.
    pub direct: Vec<Matrix>,
    pub max_route_gap: f64,
}

/// `Ẋ = AX + XA^T` from a skew `X0`, integrated in half-vectorized form
/// and directly.
pub fn lyapunov_skew_flow(
    a: &Matrix,
    x0: &Matrix,
    horizon: f64,
    dt: f64,
    limits: &Limits,
) -> Result<SkewFlow> {
    if !a.is_square() || x0.shape() != a.shape() {
        return Err(Error::domain("A and X0 must be square of the same size"));
    }
    let n = a.rows();
    let v0 = vech_skew(x0)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    if n == 1 {
        // no strictly-lower entries: the flow is identically zero
        let (steps, h) = step_plan(horizon, dt)?;
        times = (0..=steps).map(|s| if s == steps { horizon } else { s as f64 * h }).collect();
        let zero = vec![Matrix::zeros(1, 1); times.len()];
        return Ok(SkewFlow {
            times,
            states: zero.clone(),
            direct: zero,
            max_route_gap: 0.0,
        });
    }
    let a2 = add_compound_entrywise(a, 2, limits)?;
    let mut failure = None;
    rk4(
        v0,
        horizon,
        dt,
        |_, v| a2.matvec(v),
        |t, v| {
            times.push(t);
            match unvech_skew(v) {
                Ok(x) => states.push(x),
                Err(e) => failure = failure.take().or(Some(e)),
            }
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let at = a.transpose();
    let mut direct = Vec::new();
    rk4(
        x0.data().to_vec(),
        horizon,
        dt,
        |_, x| {
            let x = Matrix::from_raw(n, n, x.to_vec());
            Ok((&(a * &x) + &(&x * &at)).into_data())
        },
        |_, x| direct.push(Matrix::from_raw(n, n, x.to_vec())),
    )?;
    let max_route_gap = states
        .iter()
        .zip(&direct)
        .map(|(s, d)| s.max_abs_diff(d))
        .fold(0.0, f64::max);
    Ok(SkewFlow {
        times,
        states,
        direct,
        max_route_gap,
    })
}

/// Largest skew defect `‖X + X^T‖∞` along a matrix series.
pub fn max_skew_defect(series: &[Matrix]) -> f64 {
    series.iter().map(skew_defect).fold(0.0, f64::max)
}

/// True when `x` is skew within [`SKEW_TOL`].
pub fn is_skew(x: &Matrix) -> bool {
    x.is_square() && skew_defect(x) <= SKEW_TOL
}
