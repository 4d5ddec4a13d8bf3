//! Command-line front end. `main` only forwards to [`run`], so every
//! subcommand can be driven in-process from tests.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 parse error, 3 domain
//! error, 4 resource cap exceeded.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::compounds::{
    add_compound_entrywise, add_compound_eps_limit, add_compound_kron, default_eps,
    h_operator, mult_compound_kron, mult_compound_oracle, product_add_compound,
    product_add_compound_2, similarity_compound_check, sum_compound2_identity, CompoundReport,
    Method,
};
use crate::dynamics::{
    evolve_compound, k_contraction_test, lyapunov_skew_flow, LtvSystem, Parallelotope,
};
use crate::error::Error;
use crate::indexing::{
    binomial_usize, rank_q, rank_q_closed, rank_r, unrank_q, unrank_r, IndexSeq, Combinations,
};
use crate::kron::LinearOperator;
use crate::lifting::{build_l, build_m, skew_defect, SKEW_TOL};
use crate::limits::{Limits, DEFAULT_MAX_DIM};
use crate::matrix::Matrix;
use crate::random::{rng, skew_matrix, uniform_matrix, uniform_vector, well_conditioned, SweepRng};
use crate::spectral::{eigenvalues, k_products, k_sums, multiset_gap};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

/// Tuning shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub size_cap: usize,
    pub float_tol: f64,
    pub spectral_tol: f64,
    pub output_precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            size_cap: DEFAULT_MAX_DIM,
            float_tol: 1e-10,
            spectral_tol: 1e-7,
            output_precision: 17,
        }
    }
}

impl RunConfig {
    pub fn limits(&self) -> Limits {
        Limits::with_max_dim(self.size_cap)
    }

    /// Rounds to `output_precision` significant digits; 17 keeps every bit.
    pub fn round(&self, x: f64) -> f64 {
        if self.output_precision >= 17 || x == 0.0 {
            return x;
        }
        format!("{:.*e}", self.output_precision - 1, x)
            .parse()
            .unwrap_or(x)
    }
}

/// On-disk matrix: `{"rows": r, "cols": c, "data": [row-major]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &Matrix, name: Option<String>) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().to_vec(),
            name,
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix, CliError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(CliError::parse("rows and cols must be positive"));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::parse(format!(
                "data has {} entries, expected rows*cols = {}",
                self.data.len(),
                self.rows * self.cols
            )));
        }
        Matrix::new(self.rows, self.cols, self.data.clone())
            .map_err(|e| CliError::parse(e.to_string()))
    }
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: msg.into(),
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DOMAIN,
            message: msg.into(),
        }
    }

    fn invariant(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVARIANT,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource { .. } => EXIT_RESOURCE,
            Error::Domain(_) | Error::Numerical(_) | Error::Conditioning { .. } => EXIT_DOMAIN,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "compoundkit", version, about = "Compound matrices and Kronecker lifting")]
pub struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Float tolerance for identity checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Tolerance for eigenvalue comparisons.
    #[arg(long, global = true, default_value_t = 1e-7)]
    spectral_tol: f64,
    /// Largest allowed n^k (overrides COMPOUNDKIT_CAP).
    #[arg(long, global = true, env = "COMPOUNDKIT_CAP")]
    cap: Option<usize>,
    /// Seed for random sweeps.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Significant digits in numeric output.
    #[arg(long, global = true, default_value_t = 17)]
    precision: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MultMethod {
    Oracle,
    Kron,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AddMethod {
    Entrywise,
    Kron,
    Eps,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "L", alias = "l")]
    L,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Multiplicative compound A^(k).
    Mult {
        input: PathBuf,
        #[arg(short, long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = MultMethod::Kron)]
        method: MultMethod,
    },
    /// Additive compound A^[k].
    Add {
        input: PathBuf,
        #[arg(short, long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = AddMethod::Kron)]
        method: AddMethod,
        /// Comma-separated ε values for the eps route.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Option<Vec<f64>>,
    },
    /// Print M_{n,k} or L_{n,k} as 1-based "row col sign" triplets.
    Lift {
        n: usize,
        k: usize,
        #[arg(long, value_enum, default_value_t = Which::M)]
        which: Which,
    },
    /// (AB)^[k] from the columns of A and rows of B.
    Prodadd {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        k: usize,
    },
    /// Run the invariant suite on a seeded sweep or on one input matrix.
    Check {
        input: Option<PathBuf>,
        /// Largest n and k of the sweep.
        #[arg(long, num_args = 2, value_names = ["NMAX", "KMAX"])]
        sweep: Option<Vec<usize>>,
        /// Random instances per (n, k).
        #[arg(long, default_value_t = 10)]
        instances: usize,
        /// Treat the input as skew-symmetric and check the skew flow.
        #[arg(long)]
        skew: bool,
    },
    /// Evolve a parallelotope under ẋ = A(t)x and print a CSV series.
    Evolve {
        system: PathBuf,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long = "t", short = 't')]
        horizon: f64,
        #[arg(long)]
        dt: f64,
    },
    /// k-contraction verdict for A.
    Contract {
        input: PathBuf,
        #[arg(short, long)]
        k: usize,
    },
    /// Rank and unrank index sequences.
    Index {
        #[command(subcommand)]
        op: IndexOp,
    },
}

#[derive(Debug, Subcommand)]
enum IndexOp {
    /// Position of an increasing sequence in Q(n,k).
    RankQ { n: usize, seq: Vec<usize> },
    /// The closed-form expression for the Q rank, evaluated verbatim.
    RankQClosed { n: usize, seq: Vec<usize> },
    /// Position of a sequence in R(n,k).
    RankR { n: usize, seq: Vec<usize> },
    UnrankQ { n: usize, k: usize, p: usize },
    UnrankR { n: usize, k: usize, p: usize },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(output) => match emit(&cli.global.out, &output, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: {}", e.message);
                e.code
            }
        },
        Err(Failure { error, output }) => {
            if let Some(output) = output {
                let _ = emit(&cli.global.out, &output, stdout);
            }
            let _ = writeln!(stderr, "error: {}", error.message);
            error.code
        }
    }
}

struct Failure {
    error: CliError,
    /// Output to emit even though the command failed (the check report).
    output: Option<String>,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure {
            error,
            output: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        CliError::from(e).into()
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::parse(format!("cannot write output: {e}"))),
    }
}

fn config(g: &GlobalOpts) -> CliResult<RunConfig> {
    let cfg = RunConfig {
        size_cap: g.cap.unwrap_or(DEFAULT_MAX_DIM),
        float_tol: g.tol,
        spectral_tol: g.spectral_tol,
        output_precision: g.precision,
    };
    if cfg.size_cap < 1 {
        return Err(CliError::domain("--cap must be at least 1"));
    }
    if !(cfg.float_tol > 0.0 && cfg.spectral_tol > 0.0) {
        return Err(CliError::domain("tolerances must be positive"));
    }
    if !(1..=17).contains(&cfg.output_precision) {
        return Err(CliError::domain("--precision must be in 1..=17"));
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> std::result::Result<String, Failure> {
    let cfg = config(&cli.global)?;
    let limits = cfg.limits();
    match &cli.command {
        Command::Mult { input, k, method } => {
            let (a, name) = read_matrix(input)?;
            let report = match method {
                MultMethod::Oracle => {
                    CompoundReport::new(mult_compound_oracle(&a, *k, &limits)?, Method::MinorOracle)
                }
                MultMethod::Kron => {
                    CompoundReport::new(mult_compound_kron(&a, *k, &limits)?, Method::KronLift)
                }
                MultMethod::Both => {
                    let oracle = mult_compound_oracle(&a, *k, &limits)?;
                    CompoundReport::new(mult_compound_kron(&a, *k, &limits)?, Method::KronLift)
                        .cross_check(&oracle)?
                }
            };
            Ok(report_json(&cfg, &report, name, None))
        }
        Command::Add {
            input,
            k,
            method,
            eps,
        } => {
            let (a, name) = read_matrix(input)?;
            let eps = eps.clone().unwrap_or_else(|| default_eps(*k));
            let eps_route = || add_compound_eps_limit(&a, *k, &eps, &limits);
            let (report, residuals) = match method {
                AddMethod::Entrywise => (
                    CompoundReport::new(add_compound_entrywise(&a, *k, &limits)?, Method::Entrywise),
                    None,
                ),
                AddMethod::Kron => (
                    CompoundReport::new(add_compound_kron(&a, *k, &limits)?, Method::KronLift),
                    None,
                ),
                AddMethod::Eps => (CompoundReport::new(eps_route()?, Method::EpsLimit), None),
                AddMethod::All => {
                    let e = add_compound_entrywise(&a, *k, &limits)?;
                    let kr = add_compound_kron(&a, *k, &limits)?;
                    let ep = eps_route()?;
                    let mut res = BTreeMap::new();
                    res.insert("entrywise-kron_lift", e.max_abs_diff(&kr));
                    res.insert("entrywise-eps_limit", e.max_abs_diff(&ep));
                    res.insert("kron_lift-eps_limit", kr.max_abs_diff(&ep));
                    let report = CompoundReport::new(kr, Method::KronLift)
                        .cross_check(&e)?
                        .cross_check(&ep)?;
                    (report, Some(res))
                }
            };
            Ok(report_json(&cfg, &report, name, residuals))
        }
        Command::Lift { n, k, which } => {
            let (sel, tag) = match which {
                Which::M => (build_m(*n, *k, &limits)?, "M"),
                Which::L => (build_l(*n, *k, &limits)?, "L"),
            };
            let mut s = format!(
                "# {tag} {n} {k} {} {} {}\n",
                sel.rows(),
                sel.cols(),
                sel.nnz()
            );
            let mut trip = sel.triplets().to_vec();
            trip.sort_by_key(|t| (t.row, t.col));
            for t in &trip {
                let _ = writeln!(s, "{} {} {}", t.row, t.col, t.sign);
            }
            Ok(s)
        }
        Command::Prodadd { a, b, k } => {
            let (a, name) = read_matrix(a)?;
            let (b, _) = read_matrix(b)?;
            let direct_input = a.matmul(&b).map_err(CliError::from)?;
            let direct = add_compound_kron(&direct_input, *k, &limits)?;
            let report =
                CompoundReport::new(product_add_compound(&a, &b, *k, &limits)?, Method::ProductDecomp)
                    .cross_check(&direct)?;
            Ok(report_json(&cfg, &report, name, None))
        }
        Command::Check {
            input,
            sweep,
            instances,
            skew,
        } => check(&cfg, &limits, cli.global.seed, input.as_deref(), sweep.as_deref(), *instances, *skew),
        Command::Evolve {
            system,
            k,
            horizon,
            dt,
        } => evolve(&cfg, &limits, system, *k, *horizon, *dt),
        Command::Contract { input, k } => {
            let (a, _) = read_matrix(input)?;
            let r = k_contraction_test(&a, *k, &limits)?;
            let v = json!({
                "k": k,
                "verdict": r.verdict.as_str(),
                "abscissa": cfg.round(r.abscissa),
                "eigen_sum_abscissa": cfg.round(r.eigen_sum_abscissa),
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")))
        }
        Command::Index { op } => index(op),
    }
}

fn index(op: &IndexOp) -> std::result::Result<String, Failure> {
    let seq = |n: usize, s: &[usize]| IndexSeq::new(n, s.to_vec());
    let line = match op {
        IndexOp::RankQ { n, seq: s } => rank_q(&seq(*n, s)?)?.to_string(),
        IndexOp::RankQClosed { n, seq: s } => rank_q_closed(&seq(*n, s)?)?.to_string(),
        IndexOp::RankR { n, seq: s } => rank_r(&seq(*n, s)?)?.to_string(),
        IndexOp::UnrankQ { n, k, p } => join(unrank_q(*n, *k, *p)?.entries()),
        IndexOp::UnrankR { n, k, p } => join(unrank_r(*n, *k, *p)?.entries()),
    };
    Ok(format!("{line}\n"))
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn rounded(cfg: &RunConfig, v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| cfg.round(x)).collect()
}

fn report_json(
    cfg: &RunConfig,
    report: &CompoundReport,
    name: Option<String>,
    residuals: Option<BTreeMap<&str, f64>>,
) -> String {
    let mut v = json!({
        "rows": report.result.rows(),
        "cols": report.result.cols(),
        "data": rounded(cfg, report.result.data()),
        "method": report.method.as_str(),
    });
    if let Some(name) = name {
        v["name"] = json!(name);
    }
    if let Some(r) = report.cross_residual {
        v["cross_residual"] = json!(r);
    }
    if let Some(res) = residuals {
        v["residuals"] = json!(res);
    }
    format!("{}\n", serde_json::to_string(&v).expect("serializable"))
}

/// Reads a matrix from JSON, or CSV when the file ends in `.csv` or does
/// not start with `{`.
pub fn read_matrix(path: &Path) -> CliResult<(Matrix, Option<String>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        || !text.trim_start().starts_with('{');
    let file = if is_csv {
        parse_csv(&text)
    } else {
        parse_json(&text)
    }
    .map_err(|e| CliError::parse(format!("{}: {}", path.display(), e.message)))?;
    let m = file.to_matrix()?;
    Ok((m, file.name))
}

pub fn parse_json(text: &str) -> CliResult<MatrixFile> {
    serde_json::from_str(text).map_err(|e| {
        CliError::parse(format!("line {} column {}: {e}", e.line(), e.column()))
    })
}

/// `R,C` on the first line (optionally preceded by a literal `rows,cols`
/// header), then `R*C` comma-separated values in row-major order.
pub fn parse_csv(text: &str) -> CliResult<MatrixFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut first = lines
        .next()
        .ok_or_else(|| CliError::parse("line 1 column 1: empty input"))?;
    if first.1.replace(' ', "").eq_ignore_ascii_case("rows,cols") {
        first = lines
            .next()
            .ok_or_else(|| CliError::parse("missing dimension line after header"))?;
    }
    let dims = fields(first.0, first.1)?;
    let [rows, cols]: [f64; 2] = dims.iter().map(|(_, x)| *x).collect::<Vec<_>>().try_into().map_err(
        |_| CliError::parse(format!("line {} column 1: expected `rows,cols`", first.0)),
    )?;
    let as_dim = |x: f64| -> Option<usize> {
        (x >= 1.0 && x.fract() == 0.0 && x < 1e15).then_some(x as usize)
    };
    let (Some(rows), Some(cols)) = (as_dim(rows), as_dim(cols)) else {
        return Err(CliError::parse(format!(
            "line {} column 1: rows and cols must be positive integers",
            first.0
        )));
    };
    let mut data = Vec::new();
    for (no, line) in lines {
        for (col, x) in fields(no, line)? {
            if !x.is_finite() {
                return Err(CliError::parse(format!("line {no} column {col}: value is not finite")));
            }
            data.push(x);
        }
    }
    Ok(MatrixFile {
        rows,
        cols,
        data,
        name: None,
    })
}

fn fields(line_no: usize, line: &str) -> CliResult<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut col = 1;
    for raw in line.split(',') {
        let lead = raw.len() - raw.trim_start().len();
        let tok = raw.trim();
        if !tok.is_empty() {
            let x: f64 = tok.parse().map_err(|_| {
                CliError::parse(format!(
                    "line {line_no} column {}: cannot parse `{tok}` as a number",
                    col + lead
                ))
            })?;
            out.push((col + lead, x));
        }
        col += raw.len() + 1;
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct SystemFile {
    a: MatrixFile,
    #[serde(default)]
    a_rate: Option<MatrixFile>,
    #[serde(default)]
    generators: Option<MatrixFile>,
}

fn evolve(
    cfg: &RunConfig,
    limits: &Limits,
    path: &Path,
    k: Option<usize>,
    horizon: f64,
    dt: f64,
) -> std::result::Result<String, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let system: SystemFile = serde_json::from_str(&text).map_err(|e| {
        CliError::parse(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    let a = system.a.to_matrix()?;
    if !a.is_square() {
        return Err(CliError::domain("system matrix `a` must be square").into());
    }
    let n = a.rows();
    let rate = match &system.a_rate {
        Some(r) => {
            let r = r.to_matrix()?;
            if r.shape() != a.shape() {
                return Err(CliError::domain("`a_rate` must have the shape of `a`").into());
            }
            r
        }
        None => Matrix::zeros(n, n),
    };
    let generators = match (&system.generators, k) {
        (Some(g), k) => {
            let g = g.to_matrix()?;
            if k.is_some_and(|k| k != g.cols()) {
                return Err(CliError::domain(format!(
                    "--k {} does not match the {} generators in the file",
                    k.unwrap_or(0),
                    g.cols()
                ))
                .into());
            }
            g
        }
        (None, Some(k)) => {
            if k == 0 || k > n {
                return Err(CliError::domain(format!("k = {k} is outside [1, n = {n}]")).into());
            }
            let id = Matrix::identity(n);
            Matrix::from_columns(&(0..k).map(|j| id.column(j)).collect::<Vec<_>>())
                .map_err(CliError::from)?
        }
        (None, None) => {
            return Err(CliError::domain("give --k or a `generators` matrix").into());
        }
    };
    let p0 = Parallelotope::new(generators)?;
    let sys = LtvSystem::new(n, horizon, move |t| &a + &rate.scale(t))?;
    let series = evolve_compound(&sys, &p0, dt, limits)?;
    let r = binomial_usize(n, p0.k());
    let mut s = String::from("t,volume");
    for i in 1..=r {
        let _ = write!(s, ",z{i}");
    }
    s.push('\n');
    for ((t, vol), z) in series.times.iter().zip(&series.volumes).zip(&series.states) {
        let _ = write!(s, "{},{}", cfg.round(*t), cfg.round(*vol));
        for x in z {
            let _ = write!(s, ",{}", cfg.round(*x));
        }
        s.push('\n');
    }
    Ok(s)
}

/// One invariant of the check suite.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub instances: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Default)]
struct Suite {
    results: Vec<InvariantResult>,
}

impl Suite {
    fn record(&mut self, name: &str, tolerance: f64, residual: f64) {
        let entry = match self.results.iter_mut().find(|r| r.name == name) {
            Some(e) => e,
            None => {
                self.results.push(InvariantResult {
                    name: name.to_string(),
                    instances: 0,
                    max_residual: 0.0,
                    tolerance,
                    pass: true,
                });
                self.results.last_mut().expect("just pushed")
            }
        };
        entry.instances += 1;
        // NaN residuals fail
        if !(residual <= entry.max_residual) {
            entry.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
        }
        entry.pass = entry.max_residual <= entry.tolerance;
    }
}

fn rel_gap(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

fn check(
    cfg: &RunConfig,
    limits: &Limits,
    seed: u64,
    input: Option<&Path>,
    sweep: Option<&[usize]>,
    instances: usize,
    skew: bool,
) -> std::result::Result<String, Failure> {
    let mut suite = Suite::default();
    let mut meta = json!({ "seed": seed });
    if let Some(path) = input {
        let (a, name) = read_matrix(path)?;
        meta["input"] = json!(name.unwrap_or_else(|| path.display().to_string()));
        if skew {
            check_skew_input(&mut suite, &a, limits)?;
        } else {
            let kmax = sweep.map_or(a.rows().min(a.cols()).min(4), |s| s[1]);
            let mut g = rng(seed);
            check_matrix(&mut suite, cfg, limits, &mut g, &a, kmax)?;
        }
    } else {
        let (nmax, kmax) = sweep.map_or((4, 3), |s| (s[0], s[1]));
        if nmax == 0 || kmax == 0 {
            return Err(CliError::domain("--sweep bounds must be positive").into());
        }
        meta["sweep"] = json!({ "nmax": nmax, "kmax": kmax, "instances": instances });
        let mut g = rng(seed);
        for n in 1..=nmax {
            check_selectors(&mut suite, limits, n, kmax)?;
            for _ in 0..instances {
                let a = uniform_matrix(&mut g, n, n);
                check_matrix(&mut suite, cfg, limits, &mut g, &a, kmax)?;
            }
            if n >= 2 {
                let a = uniform_matrix(&mut g, n, n);
                let x0 = skew_matrix(&mut g, n);
                let flow = lyapunov_skew_flow(&a, &x0, 1.0, 1e-2, limits)?;
                suite.record("skew Lyapunov route agreement", 1e-6, flow.max_route_gap);
            }
        }
    }
    let pass = suite.results.iter().all(|r| r.pass);
    meta["pass"] = json!(pass);
    meta["invariants"] = serde_json::to_value(&suite.results).expect("serializable");
    let text = format!("{}\n", serde_json::to_string_pretty(&meta).expect("serializable"));
    if pass {
        Ok(text)
    } else {
        let failing: Vec<&str> = suite
            .results
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect();
        Err(Failure {
            error: CliError::invariant(format!("invariant failed: {}", failing.join(", "))),
            output: Some(text),
        })
    }
}

fn check_skew_input(suite: &mut Suite, a: &Matrix, limits: &Limits) -> CliResult<()> {
    if !a.is_square() {
        return Err(CliError::domain("skew check needs a square matrix"));
    }
    let defect = skew_defect(a);
    suite.record("vech_skew precondition", SKEW_TOL, defect);
    if defect <= SKEW_TOL && a.rows() >= 2 {
        let flow = lyapunov_skew_flow(&Matrix::identity(a.rows()), a, 1.0, 1e-2, limits)?;
        suite.record("skew Lyapunov route agreement", 1e-6, flow.max_route_gap);
    }
    Ok(())
}

fn check_selectors(suite: &mut Suite, limits: &Limits, n: usize, kmax: usize) -> CliResult<()> {
    for k in 1..=n.min(kmax) {
        let m_sel = build_m(n, k, limits)?;
        let l_sel = build_l(n, k, limits)?;
        let prod = l_sel.product_i64(&m_sel)?;
        let r = m_sel.cols();
        let defect = prod
            .iter()
            .enumerate()
            .map(|(p, &x)| (x - i64::from(p / r == p % r)).abs())
            .max()
            .unwrap_or(0);
        suite.record("L*M = identity", 0.0, defect as f64);
        let mut worst = 0.0f64;
        for (p, c) in Combinations::new(n, k).enumerate() {
            let seq = IndexSeq::increasing(n, c).map_err(CliError::from)?;
            let back = unrank_q(n, k, p + 1)?;
            let ok = rank_q(&seq)? == p + 1 && back == seq;
            worst = worst.max(if ok { 0.0 } else { 1.0 });
        }
        suite.record("rank_q enumeration round trip", 0.0, worst);
    }
    Ok(())
}

fn check_matrix(
    suite: &mut Suite,
    cfg: &RunConfig,
    limits: &Limits,
    g: &mut SweepRng,
    a: &Matrix,
    kmax: usize,
) -> CliResult<()> {
    let (n, m) = a.shape();
    for k in 1..=n.min(m).min(kmax) {
        let oracle = mult_compound_oracle(a, k, limits)?;
        let kr = mult_compound_kron(a, k, limits)?;
        suite.record("mult compound oracle vs kron", cfg.float_tol, rel_gap(&kr, &oracle));
        let at = mult_compound_oracle(&a.transpose(), k, limits)?;
        suite.record("transpose compatibility", 1e-12, at.max_abs_diff(&oracle.transpose()));
    }
    if n != m {
        return Ok(());
    }
    let scale = a.norm_inf().max(1.0);
    for k in 1..=n.min(kmax) {
        let e = add_compound_entrywise(a, k, limits)?;
        let kr = add_compound_kron(a, k, limits)?;
        let ep = add_compound_eps_limit(a, k, &default_eps(k), limits)?;
        let gap = e.max_abs_diff(&kr).max(e.max_abs_diff(&ep)).max(kr.max_abs_diff(&ep));
        suite.record("add compound three-way agreement", 1e-8, gap / scale);

        let b = uniform_matrix(g, n, n);
        let ab = mult_compound_oracle(&(a * &b), k, limits)?;
        let prod = &mult_compound_oracle(a, k, limits)? * &mult_compound_oracle(&b, k, limits)?;
        suite.record("Cauchy-Binet", 1e-8, rel_gap(&prod, &ab));

        let t = well_conditioned(g, n);
        suite.record("similarity", 1e-8, similarity_compound_check(&t, a, k, limits)? / scale);

        let direct = add_compound_kron(&(a * &b), k, limits)?;
        let p = product_add_compound(a, &b, k, limits)?;
        suite.record("product decomposition", cfg.float_tol, rel_gap(&p, &direct));
        for mdim in [n.saturating_sub(1).max(1), n + 1] {
            let w = uniform_matrix(g, n, mdim);
            let v = uniform_matrix(g, mdim, n);
            let direct = add_compound_kron(&(&w * &v), k, limits)?;
            let p = product_add_compound(&w, &v, k, limits)?;
            suite.record("product decomposition", cfg.float_tol, rel_gap(&p, &direct));
        }
        if k == 2 {
            let p2 = product_add_compound_2(a, &b, limits)?;
            suite.record("product decomposition k=2 form", cfg.float_tol, rel_gap(&p2, &direct));
        }

        if k >= 2 {
            let m_sel = build_m(n, k, limits)?;
            let z = uniform_vector(g, m_sel.cols());
            let x = m_sel.apply(&z)?;
            let v = uniform_vector(g, n);
            let first = h_operator(n, k, 1, &v, limits)?.apply(&x)?;
            let mut worst = 0.0f64;
            for i in 2..=k {
                let s = if i % 2 == 1 { 1.0 } else { -1.0 };
                let hi = h_operator(n, k, i, &v, limits)?.apply(&x)?;
                for (p, q) in hi.iter().zip(&first) {
                    worst = worst.max((p - s * q).abs());
                }
            }
            suite.record("H sign flip", 1e-12, worst);
        }

        let eigs = eigenvalues(a)?;
        let mult_gap = multiset_gap(&eigenvalues(&mult_compound_oracle(a, k, limits)?)?, &k_products(&eigs, k))?;
        suite.record("multiplicative spectral property", cfg.spectral_tol, mult_gap);
        let add_gap = multiset_gap(&eigenvalues(&e)?, &k_sums(&eigs, k))?;
        suite.record("additive spectral property", cfg.spectral_tol, add_gap);
    }
    if n >= 2 {
        let b = uniform_matrix(g, n, n);
        let lhs = sum_compound2_identity(a, &b, limits)?;
        let rhs = mult_compound_oracle(&(a + &b), 2, limits)?;
        suite.record("(A+B)^(2) identity", cfg.float_tol, rel_gap(&lhs, &rhs));
        if n == 2 {
            let det = |x: &Matrix| x.det().map_err(CliError::from);
            let lhs = det(&(a + &b))?;
            let rhs = det(a)? + det(&b)? + a.trace() * b.trace() - (a * &b).trace();
            suite.record("2x2 determinant identity", 1e-12, (lhs - rhs).abs());
        }
    }
    Ok(())
}
