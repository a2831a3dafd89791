//! Experiment runner behind the `hsodm` binary: Krylov-count sweeps on
//! shifted Hilbert systems and ridge normal equations, full minimization
//! traces with JSON summaries, and JSON-config batch runs.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::adaptive::{adaptive_hsodm, AdaptiveConfig};
use crate::dataio::{
    parse_libsvm_file, synthetic_collinear_dataset, synthetic_dataset, LabelModel,
};
use crate::error::{Error, Result};
use crate::ghm::{solve_ghm, GhmSpec};
use crate::homotopy::{homotopy_hsodm, HomotopyConfig};
use crate::krylov::{
    cg_solve, gmres_solve, hilbert_operator, normal_equations_operator, SymmetricOperator,
};
use crate::problems::{
    concordance_beta_logistic, least_squares_objective, logistic_l2_objective,
    matrix_balancing_objective, quartic_objective, Objective,
};
use crate::trace::{
    emit_summary, summarize, write_aggregate_csv, write_trace_csv, AggregateRecord, RunStatus,
    RunSummary, TraceRecord,
};
use crate::variants::{inexact_newton, NewtonParams};

/// Residual target for both the linear solves and the bordered eigenpair in
/// the Krylov-count sweeps.
const SWEEP_TOL: f64 = 1e-6;

/// Method tags in sweep output order.
pub const METHODS: [&str; 4] = ["newton-cg", "newton-gmres", "newton-rgmres", "ghm-lanczos"];

/// Environment variable naming a directory searched for datasets when no
/// explicit path is given.
pub const DATA_DIR_ENV: &str = "HSODM_DATA_DIR";

/// Explicit path if given, otherwise `$HSODM_DATA_DIR/<name>` when that file
/// exists.
pub fn resolve_dataset(explicit: Option<&Path>, name: &str) -> Option<PathBuf> {
    if let Some(path) = explicit {
        return Some(path.to_path_buf());
    }
    std::env::var_os(DATA_DIR_ENV)
        .map(|dir| Path::new(&dir).join(name))
        .filter(|path| path.exists())
}

fn cell_rhs(n: usize, seed: u64, param_idx: usize, sample: usize) -> DVector<f64> {
    let cell = seed
        .wrapping_add((param_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((sample as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut rng = ChaCha8Rng::seed_from_u64(cell);
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// One sweep cell: returns (Krylov iterations, matvecs) on success, `None`
/// when the solver failed or missed the residual target within budget.
fn run_cell(
    method: &str,
    op: &dyn SymmetricOperator,
    b: &DVector<f64>,
    seed: u64,
) -> Option<(usize, usize)> {
    let n = op.dim();
    op.reset_matvec_count();
    let iters = match method {
        "newton-cg" => match cg_solve(op, b, SWEEP_TOL, 20 * n) {
            Ok(res) if res.converged => res.iters,
            _ => return None,
        },
        // Unrestarted GMRES exhausts the space after n steps, so a larger
        // budget only buys quadratic orthogonalization cost.
        "newton-gmres" => match gmres_solve(op, b, SWEEP_TOL, n, None) {
            Ok(res) if res.converged => res.iters,
            _ => return None,
        },
        "newton-rgmres" => match gmres_solve(op, b, SWEEP_TOL, 20 * n, Some(20)) {
            Ok(res) if res.converged => res.iters,
            _ => return None,
        },
        "ghm-lanczos" => {
            let phi = -b;
            let spec = GhmSpec {
                hess: op,
                phi: &phi,
                delta: 0.0,
            };
            match solve_ghm(spec, SWEEP_TOL, None, seed, 1e-6, 1e8) {
                Ok(sol) => sol.eig_iters,
                Err(_) => return None,
            }
        }
        other => panic!("unknown sweep method {other}"),
    };
    Some((iters, op.matvec_count()))
}

fn aggregate(
    method: &str,
    param: &str,
    value: f64,
    cells: &[Option<(usize, usize)>],
) -> AggregateRecord {
    let successes: Vec<(usize, usize)> = cells.iter().flatten().copied().collect();
    let failures = cells.len() - successes.len();
    let mean = |pick: fn(&(usize, usize)) -> usize| -> f64 {
        if successes.is_empty() {
            0.0
        } else {
            successes.iter().map(pick).sum::<usize>() as f64 / successes.len() as f64
        }
    };
    AggregateRecord {
        method: method.into(),
        param: param.into(),
        value,
        samples: cells.len(),
        avg_iters: mean(|c| c.0),
        failures,
        avg_matvecs: mean(|c| c.1),
    }
}

#[derive(Debug, Clone)]
pub struct HilbertConfig {
    pub n: usize,
    pub shifts: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for HilbertConfig {
    fn default() -> Self {
        Self {
            n: 100,
            shifts: vec![1e-5, 1e-7, 1e-9],
            samples: 5,
            seed: 0,
        }
    }
}

/// Sweeps `Hilbert(n) + shift I` systems with seeded uniform right-hand
/// sides: each (method, shift) pair becomes one aggregate row, in method-major
/// config order. Solver failures are counted, never fatal.
pub fn run_hilbert(cfg: &HilbertConfig, out: Option<&Path>) -> Result<Vec<AggregateRecord>> {
    if cfg.n == 0 || cfg.shifts.is_empty() || cfg.samples == 0 {
        return Err(Error::InvalidInput(
            "hilbert sweep needs n >= 1, at least one shift, and samples >= 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for method in METHODS {
        for (pi, &shift) in cfg.shifts.iter().enumerate() {
            let op = hilbert_operator(cfg.n, shift);
            let cells: Vec<_> = (0..cfg.samples)
                .map(|s| {
                    let b = cell_rhs(cfg.n, cfg.seed, pi, s);
                    run_cell(method, &op, &b, cfg.seed.wrapping_add(s as u64))
                })
                .collect();
            rows.push(aggregate(method, "shift", shift, &cells));
        }
    }
    if let Some(path) = out {
        write_aggregate_csv(path, &rows)?;
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct KrylovTableConfig {
    /// LIBSVM dataset path; falls back to `$HSODM_DATA_DIR/a4a`, then to the
    /// seeded collinear synthetic stand-in.
    pub data: Option<PathBuf>,
    pub gammas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for KrylovTableConfig {
    fn default() -> Self {
        Self {
            data: None,
            gammas: vec![1e-3, 1e-4, 1e-5, 1e-6],
            samples: 5,
            seed: 0,
        }
    }
}

/// Tabulates average Krylov iterations for ridge normal-equation systems
/// `(X'X/N + gamma I) d = b` across the ridge weights, one aggregate row per
/// (method, gamma) in config order.
pub fn run_krylov_table(
    cfg: &KrylovTableConfig,
    out: Option<&Path>,
) -> Result<Vec<AggregateRecord>> {
    if cfg.gammas.is_empty() || cfg.samples == 0 {
        return Err(Error::InvalidInput(
            "krylov table needs at least one gamma and samples >= 1".into(),
        ));
    }
    let data = match resolve_dataset(cfg.data.as_deref(), "a4a") {
        Some(path) => parse_libsvm_file(path, None)?,
        None => synthetic_collinear_dataset(cfg.seed ^ 0xDA7A, 50, 400, 0.6),
    };
    let n = data.cols();
    let mut rows = Vec::new();
    for method in METHODS {
        for (pi, &gamma) in cfg.gammas.iter().enumerate() {
            let op = normal_equations_operator(&data, gamma);
            let cells: Vec<_> = (0..cfg.samples)
                .map(|s| {
                    let b = cell_rhs(n, cfg.seed, pi, s);
                    run_cell(method, &op, &b, cfg.seed.wrapping_add(s as u64))
                })
                .collect();
            rows.push(aggregate(method, "gamma", gamma, &cells));
        }
    }
    if let Some(path) = out {
        write_aggregate_csv(path, &rows)?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Logistic,
    LeastSquares,
    Balancing,
    Quartic,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Self::Logistic),
            "lsq" => Ok(Self::LeastSquares),
            "balancing" => Ok(Self::Balancing),
            "quartic" => Ok(Self::Quartic),
            other => Err(Error::InvalidInput(format!(
                "unknown problem '{other}' (expected logistic, lsq, balancing, or quartic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoKind {
    Adaptive,
    Homotopy,
    INewton,
}

impl AlgoKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(Self::Adaptive),
            "homotopy" => Ok(Self::Homotopy),
            "inewton" => Ok(Self::INewton),
            other => Err(Error::InvalidInput(format!(
                "unknown algorithm '{other}' (expected adaptive, homotopy, or inewton)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    pub problem: ProblemKind,
    /// LIBSVM path for the data-backed problems; synthetic when absent.
    pub data: Option<PathBuf>,
    pub algo: AlgoKind,
    pub eps: f64,
    /// Ridge weight for the logistic and least-squares problems.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Logistic,
            data: None,
            algo: AlgoKind::Adaptive,
            eps: 1e-8,
            gamma: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub status: RunStatus,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub trace: Vec<TraceRecord>,
    pub summaries: Vec<RunSummary>,
}

/// Builds the configured objective. The second value is the concordance
/// constant used for homotopy runs (estimated for logistic, declared by the
/// objective otherwise).
fn build_objective(cfg: &MinimizeConfig) -> Result<(Box<dyn Objective>, f64)> {
    match cfg.problem {
        ProblemKind::Logistic => {
            let data = match &cfg.data {
                Some(path) => parse_libsvm_file(path, None)?,
                None => synthetic_dataset(cfg.seed ^ 0x10c1, 20, 200, 0.3, LabelModel::Sign),
            };
            let (threshold_ok, beta) = concordance_beta_logistic(&data, cfg.gamma)?;
            // Below the concordance threshold the certified constant is so
            // large that the homotopy schedule contracts mu by ~1/beta per
            // epoch; fall back to a unit constant there. Centering residuals
            // are still measured, only the worst-case epoch bound is void.
            let beta = if threshold_ok { beta } else { beta.min(1.0) };
            let obj = logistic_l2_objective(data, cfg.gamma)?.with_concordance_beta(beta);
            Ok((Box::new(obj), beta))
        }
        ProblemKind::LeastSquares => {
            let data = match &cfg.data {
                Some(path) => parse_libsvm_file(path, None)?,
                None => synthetic_dataset(cfg.seed ^ 0x15c0, 20, 200, 0.3, LabelModel::Linear),
            };
            let obj = least_squares_objective(data, cfg.gamma);
            // beta = 0 for a quadratic; the homotopy config requires a
            // strictly positive constant, and this small a value changes the
            // schedule by less than one part in 1e6.
            Ok((Box::new(obj), 1e-6))
        }
        ProblemKind::Balancing => {
            let n = 5;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xBA1A);
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        a[(i, j)] = rng.gen_range(0.1..1.0);
                    }
                }
            }
            let obj = matrix_balancing_objective(a)?;
            let beta = obj.concordance_beta().unwrap_or(2.0);
            Ok((Box::new(obj), beta))
        }
        ProblemKind::Quartic => Ok((Box::new(quartic_objective()), 1.0)),
    }
}

/// Runs one algorithm on one problem to `||g|| <= eps`, writing the trace CSV
/// to `out` and a JSON run summary next to it (extension `summary.json`).
///
/// Start points follow the benchmark convention: `x0 ~ N(0, 100 I)` from the
/// run seed, except homotopy which starts at the origin (its initial
/// regularization weight is chosen for that start).
pub fn run_minimize(cfg: &MinimizeConfig, out: Option<&Path>) -> Result<MinimizeOutcome> {
    let (obj, beta) = build_objective(cfg)?;
    let n = obj.dim();
    let normal = Normal::new(0.0, 10.0).expect("valid scale");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x0 = DVector::from_fn(n, |_, _| normal.sample(&mut rng));

    let (status, final_f, final_grad_norm, trace) = match cfg.algo {
        AlgoKind::Adaptive => {
            let acfg = AdaptiveConfig {
                eps: cfg.eps,
                seed: cfg.seed,
                ..AdaptiveConfig::default()
            };
            let run = adaptive_hsodm(obj.as_ref(), &x0, &acfg)?;
            (run.status, run.f, run.grad_norm, run.trace)
        }
        AlgoKind::Homotopy => {
            if !obj.convex() {
                return Err(Error::InvalidInput(format!(
                    "homotopy requires a convex objective; {} is not",
                    obj.name()
                )));
            }
            let hcfg = HomotopyConfig {
                beta,
                eps: cfg.eps,
                seed: cfg.seed,
                ..HomotopyConfig::default()
            };
            let run = homotopy_hsodm(obj.as_ref(), &hcfg)?;
            (run.status, run.f, run.grad_norm, run.trace)
        }
        AlgoKind::INewton => {
            let params = NewtonParams {
                eps: cfg.eps,
                seed: cfg.seed,
                ..NewtonParams::default()
            };
            let run = inexact_newton(obj.as_ref(), &x0, &params)?;
            (run.status, run.f, run.grad_norm, run.trace)
        }
    };

    let summaries = summarize(&trace);
    if let Some(path) = out {
        write_trace_csv(path, &trace)?;
        let json = emit_summary(&trace)?;
        std::fs::write(path.with_extension("summary.json"), json)?;
    }
    Ok(MinimizeOutcome {
        status,
        final_f,
        final_grad_norm,
        trace,
        summaries,
    })
}

/// Batch description loaded from a JSON file: one experiment expanded over a
/// seed list. Unknown keys are rejected up front.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// One of "hilbert", "krylov-table", "minimize".
    pub experiment: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub shifts: Option<Vec<f64>>,
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub problem: Option<String>,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub algo: Option<String>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidInput("config needs at least one seed".into()));
        }
        match self.experiment.as_str() {
            "hilbert" | "krylov-table" => Ok(()),
            "minimize" => {
                let problem = self.problem.as_deref().ok_or_else(|| {
                    Error::InvalidInput("minimize config needs a problem".into())
                })?;
                let algo = self
                    .algo
                    .as_deref()
                    .ok_or_else(|| Error::InvalidInput("minimize config needs an algo".into()))?;
                ProblemKind::parse(problem)?;
                AlgoKind::parse(algo)?;
                Ok(())
            }
            other => Err(Error::InvalidInput(format!(
                "unknown experiment '{other}' (expected hilbert, krylov-table, or minimize)"
            ))),
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Output path for one seed of a batch: unchanged for single-seed configs,
/// otherwise the seed is folded into the file stem.
fn seeded_path(out: &Path, seed: u64, multi: bool) -> PathBuf {
    if !multi {
        return out.to_path_buf();
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}-seed{seed}.{ext}"))
}

/// Runs a validated config, one output file per seed. Returns the written
/// paths.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let multi = cfg.seeds.len() > 1;
    let mut written = Vec::new();
    for &seed in &cfg.seeds {
        let out = seeded_path(&cfg.out, seed, multi);
        match cfg.experiment.as_str() {
            "hilbert" => {
                let defaults = HilbertConfig::default();
                let hcfg = HilbertConfig {
                    n: cfg.n.unwrap_or(defaults.n),
                    shifts: cfg.shifts.clone().unwrap_or(defaults.shifts),
                    samples: cfg.samples.unwrap_or(defaults.samples),
                    seed,
                };
                run_hilbert(&hcfg, Some(&out))?;
            }
            "krylov-table" => {
                let defaults = KrylovTableConfig::default();
                let kcfg = KrylovTableConfig {
                    data: cfg.data.clone(),
                    gammas: cfg.gammas.clone().unwrap_or(defaults.gammas),
                    samples: cfg.samples.unwrap_or(defaults.samples),
                    seed,
                };
                run_krylov_table(&kcfg, Some(&out))?;
            }
            "minimize" => {
                let defaults = MinimizeConfig::default();
                let mcfg = MinimizeConfig {
                    problem: ProblemKind::parse(cfg.problem.as_deref().expect("validated"))?,
                    data: cfg.data.clone(),
                    algo: AlgoKind::parse(cfg.algo.as_deref().expect("validated"))?,
                    eps: cfg.eps.unwrap_or(defaults.eps),
                    gamma: cfg.gamma.unwrap_or(defaults.gamma),
                    seed,
                };
                run_minimize(&mcfg, Some(&out))?;
            }
            _ => unreachable!("validated above"),
        }
        written.push(out);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_sweep_has_method_major_rows_and_no_failures_when_tame() {
        let cfg = HilbertConfig {
            n: 8,
            shifts: vec![1e-2, 1e-4],
            samples: 2,
            seed: 7,
        };
        let rows = run_hilbert(&cfg, None).unwrap();
        assert_eq!(rows.len(), METHODS.len() * 2);
        assert_eq!(rows[0].method, "newton-cg");
        assert_eq!(rows[0].param, "shift");
        assert_eq!(rows[0].value, 1e-2);
        assert_eq!(rows[1].value, 1e-4);
        assert_eq!(rows[7].method, "ghm-lanczos");
        for row in &rows {
            assert_eq!(row.samples, 2);
            assert_eq!(row.failures, 0, "{} failed at {}", row.method, row.value);
            assert!(row.avg_iters > 0.0);
            assert!(row.avg_matvecs >= row.avg_iters);
        }
    }

    #[test]
    fn krylov_table_is_deterministic_for_a_fixed_seed() {
        let cfg = KrylovTableConfig {
            data: None,
            gammas: vec![1e-3, 1e-5],
            samples: 2,
            seed: 11,
        };
        let first = run_krylov_table(&cfg, None).unwrap();
        let second = run_krylov_table(&cfg, None).unwrap();
        assert_eq!(first.len(), 8);
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.method, b.method);
            assert_eq!(a.value, b.value);
            assert_eq!(a.avg_iters, b.avg_iters);
            assert_eq!(a.failures, b.failures);
            assert_eq!(a.avg_matvecs, b.avg_matvecs);
        }
    }

    #[test]
    fn minimize_quartic_with_adaptive_reaches_the_target() {
        let cfg = MinimizeConfig {
            problem: ProblemKind::Quartic,
            algo: AlgoKind::Adaptive,
            seed: 3,
            ..MinimizeConfig::default()
        };
        let outcome = run_minimize(&cfg, None).unwrap();
        assert_eq!(outcome.status, RunStatus::Success);
        assert!(outcome.final_grad_norm <= 1e-8);
        assert!(!outcome.trace.is_empty());
        assert_eq!(outcome.summaries.len(), 1);
        assert_eq!(outcome.summaries[0].algo, "adaptive");
    }

    #[test]
    fn minimize_balancing_with_homotopy_reaches_the_target() {
        let cfg = MinimizeConfig {
            problem: ProblemKind::Balancing,
            algo: AlgoKind::Homotopy,
            seed: 5,
            ..MinimizeConfig::default()
        };
        let outcome = run_minimize(&cfg, None).unwrap();
        assert_eq!(outcome.status, RunStatus::Success);
        assert!(outcome.final_grad_norm <= 1e-8);
        assert_eq!(outcome.summaries[0].algo, "homotopy");
    }

    #[test]
    fn minimize_rejects_homotopy_on_nonconvex_problems() {
        let cfg = MinimizeConfig {
            problem: ProblemKind::Quartic,
            algo: AlgoKind::Homotopy,
            ..MinimizeConfig::default()
        };
        assert!(matches!(
            run_minimize(&cfg, None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn minimize_writes_trace_and_summary_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run.csv");
        let cfg = MinimizeConfig {
            problem: ProblemKind::LeastSquares,
            algo: AlgoKind::INewton,
            seed: 9,
            ..MinimizeConfig::default()
        };
        let outcome = run_minimize(&cfg, Some(&out)).unwrap();
        assert_eq!(outcome.status, RunStatus::Success);
        let csv = std::fs::read_to_string(&out).unwrap();
        assert!(csv.starts_with("run_id,algo,k,j,f,grad_norm"));
        let json = std::fs::read_to_string(dir.path().join("run.summary.json")).unwrap();
        assert!(json.contains("\"algo\": \"inewton\""));
    }

    #[test]
    fn config_validation_and_batch_expansion() {
        let bad: std::result::Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"experiment":"hilbert","seeds":[1],"out":"x.csv","zzz":1}"#);
        assert!(bad.is_err(), "unknown keys must be rejected");

        let missing: ExperimentConfig = serde_json::from_str(
            r#"{"experiment":"minimize","seeds":[1],"out":"x.csv"}"#,
        )
        .unwrap();
        assert!(missing.validate().is_err());

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("h.csv");
        let cfg = ExperimentConfig {
            experiment: "hilbert".into(),
            n: Some(6),
            shifts: Some(vec![1e-2]),
            gammas: None,
            samples: Some(1),
            problem: None,
            data: None,
            algo: None,
            eps: None,
            gamma: None,
            seeds: vec![1, 2],
            out: out.clone(),
        };
        let written = run_config(&cfg).unwrap();
        assert_eq!(written.len(), 2);
        assert!(written[0].ends_with("h-seed1.csv"));
        assert!(written[1].ends_with("h-seed2.csv"));
        for path in &written {
            assert!(path.exists());
        }
    }

    #[test]
    fn dataset_resolution_prefers_explicit_then_env() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("tiny-ds");
        std::fs::write(&file, "+1 1:0.5 3:1.0\n-1 2:0.25\n").unwrap();
        let explicit = resolve_dataset(Some(&file), "ignored");
        assert_eq!(explicit.unwrap(), file);

        std::env::set_var(DATA_DIR_ENV, dir.path());
        let found = resolve_dataset(None, "tiny-ds");
        std::env::remove_var(DATA_DIR_ENV);
        assert_eq!(found.unwrap(), file);

        assert!(resolve_dataset(None, "tiny-ds").is_none());
    }
}
