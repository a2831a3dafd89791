//! Homotopy driver for convex curvature-concordant objectives: follow the
//! ridge-regularized central path x_mu (the minimizer of f + mu/2 ||x||^2)
//! with inexact centering by bordered-model steps at delta = -mu, shrinking
//! mu geometrically each epoch.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ghm::{solve_ghm, GhmSolution, GhmSpec};
use crate::problems::{HessianAt, Objective};
use crate::trace::{RunStatus, TraceRecord};

const T_THRESHOLD: f64 = 1e-6;
const DELTA_CAP: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct HomotopyConfig {
    /// Concordance constant of the objective (a property of f, supplied by
    /// the caller; see the estimators in the problems module).
    pub beta: f64,
    pub eps: f64,
    pub max_epochs: usize,
    pub max_inner: usize,
    pub eig_tol: f64,
    pub seed: u64,
    pub warm_start: bool,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            eps: 1e-8,
            max_epochs: 4000,
            max_inner: 40,
            eig_tol: 1e-10,
            seed: 0,
            warm_start: true,
        }
    }
}

impl HomotopyConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && self.eps > 0.0
            && self.max_epochs >= 1
            && self.max_inner >= 1
            && self.eig_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "homotopy config requires beta, eps, eig_tol > 0 and positive budgets".into(),
            ))
        }
    }

    fn centering_threshold(&self, mu: f64) -> f64 {
        mu / (1.0 + 3.0 * (self.beta + 1.0))
    }
}

/// Accepted centering state for one value of mu.
#[derive(Debug, Clone)]
pub struct EpochResult {
    pub x: DVector<f64>,
    pub rho: f64,
    pub inner_iters: usize,
    pub centering_residual: f64,
}

/// Per-epoch telemetry: residuals are ||g + mu x|| / mu after entry and
/// after each inner step, so quadratic-convergence chains can be checked.
#[derive(Debug, Clone, Default)]
pub struct EpochTrace {
    pub residuals: Vec<f64>,
    pub krylov_iters: usize,
    pub matvecs: usize,
    pub ghm_solves: usize,
}

pub fn initial_mu(g0_norm: f64, beta: f64) -> f64 {
    2.0 * (beta + 1.0) * (1.0 + g0_norm * g0_norm)
}

pub fn shrink_factor(x_norm: f64, beta: f64) -> f64 {
    let c = 3.0 * (beta + 1.0) * (1.0 + x_norm);
    c / (1.0 + c)
}

/// Epoch budget for the inner centering loop once the path is being
/// tracked: T = ceil(log2((log(1+3(b+1)) - log(b+1)) / (log 3 - log 2))).
pub fn inner_budget_t(beta: f64) -> usize {
    let num = (1.0 + 3.0 * (beta + 1.0)).ln() - (beta + 1.0).ln();
    let ratio = num / (3.0f64.ln() - 2.0f64.ln());
    if !ratio.is_finite() || ratio <= 1.0 {
        return 1;
    }
    (ratio.log2().ceil() as usize).max(1)
}

/// One centering step at `x`: solve the bordered model with linear term
/// `g(x) + mu x` and corner `-mu`. Convexity rules out the hard case, so a
/// surfaced hard case is reported as a convexity violation.
pub fn homotopy_ghm_step(
    obj: &dyn Objective,
    x: &DVector<f64>,
    mu: f64,
    eig_tol: f64,
    warm: Option<&DVector<f64>>,
    seed: u64,
) -> Result<(DVector<f64>, GhmSolution)> {
    assert!(mu > 0.0);
    let hess = HessianAt::new(obj, x.clone());
    let phi = obj.gradient(x) + x * mu;
    let spec = GhmSpec {
        hess: &hess,
        phi: &phi,
        delta: -mu,
    };
    let sol = solve_ghm(spec, eig_tol, warm, seed, T_THRESHOLD, DELTA_CAP)?;
    if sol.hard_case {
        return Err(Error::ConvexityViolation {
            lambda1: sol.lambda1,
        });
    }
    let d = sol.d.clone().unwrap_or_else(|| DVector::zeros(obj.dim()));
    Ok((d, sol))
}

/// Inexact centering at fixed `mu`: steps until ||g + mu x|| falls below
/// mu / (1 + 3(beta+1)), checking the acceptance test before every step.
/// `warm` carries the previous bordered eigenvector across solves (and
/// across epochs) when warm starting is enabled.
pub fn iacghm_recorded(
    obj: &dyn Objective,
    x_start: &DVector<f64>,
    mu: f64,
    cfg: &HomotopyConfig,
    warm: &mut Option<DVector<f64>>,
) -> Result<(EpochResult, EpochTrace)> {
    cfg.validate()?;
    let threshold = cfg.centering_threshold(mu);
    // The eigensolver must resolve the boundary eigenpair finer than the
    // centering test it serves.
    let eig_tol = (0.01 * threshold).min(cfg.eig_tol).max(1e-13);

    let mut x = x_start.clone();
    let mut trace = EpochTrace::default();
    for j in 0..=cfg.max_inner {
        let residual = (obj.gradient(&x) + &x * mu).norm();
        trace.residuals.push(residual / mu);
        if residual <= threshold {
            return Ok((
                EpochResult {
                    rho: shrink_factor(x.norm(), cfg.beta),
                    x,
                    inner_iters: j,
                    centering_residual: residual,
                },
                trace,
            ));
        }
        if j == cfg.max_inner {
            break;
        }
        let (d, sol) = homotopy_ghm_step(
            obj,
            &x,
            mu,
            eig_tol,
            warm.as_ref().filter(|_| cfg.warm_start),
            cfg.seed.wrapping_add(j as u64),
        )?;
        trace.krylov_iters += sol.eig_iters;
        trace.ghm_solves += 1;
        x += &d;
        if cfg.warm_start {
            let n = obj.dim();
            let mut w = DVector::zeros(n + 1);
            w.rows_mut(0, n).copy_from(&sol.v);
            w[n] = sol.t;
            *warm = Some(w);
        }
    }
    Err(Error::CenteringBudget {
        max_inner: cfg.max_inner,
        mu,
    })
}

pub fn iacghm(
    obj: &dyn Objective,
    x_start: &DVector<f64>,
    mu: f64,
    cfg: &HomotopyConfig,
    warm: &mut Option<DVector<f64>>,
) -> Result<EpochResult> {
    iacghm_recorded(obj, x_start, mu, cfg, warm).map(|(epoch, _)| epoch)
}

/// Completed homotopy run.
#[derive(Debug, Clone)]
pub struct HomotopyRun {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub status: RunStatus,
    pub epochs: usize,
    pub ghm_solves: usize,
    pub krylov_iters: usize,
    pub trace: Vec<TraceRecord>,
    pub epoch_results: Vec<EpochResult>,
}

/// Full driver from the origin (the start point the mu_0 guarantee assumes).
pub fn homotopy_hsodm(obj: &dyn Objective, cfg: &HomotopyConfig) -> Result<HomotopyRun> {
    homotopy_hsodm_from(obj, &DVector::zeros(obj.dim()), cfg)
}

/// Driver from an arbitrary start. Any `x0` other than the origin voids the
/// initial-mu guarantee; the first epoch may then need more inner steps.
pub fn homotopy_hsodm_from(
    obj: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &HomotopyConfig,
) -> Result<HomotopyRun> {
    cfg.validate()?;
    let run_id = format!("homotopy-{:016x}", cfg.seed);
    let started = Instant::now();
    let mut last_wall = 0u64;

    let mut x = x0.clone();
    let mut g = obj.gradient(&x);
    let mut mu = initial_mu(g.norm(), cfg.beta);
    let mut warm: Option<DVector<f64>> = None;
    let mut status = RunStatus::Budget;
    let mut trace = Vec::new();
    let mut epoch_results = Vec::new();
    let mut ghm_total = 0usize;
    let mut krylov_total = 0usize;
    let mut epochs_done = 0usize;

    for k in 0..cfg.max_epochs {
        if g.norm() <= cfg.eps {
            status = RunStatus::Success;
            break;
        }
        epochs_done = k + 1;
        let (epoch, etrace) = iacghm_recorded(obj, &x, mu, cfg, &mut warm)?;
        x = epoch.x.clone();
        g = obj.gradient(&x);
        ghm_total += etrace.ghm_solves;
        krylov_total += etrace.krylov_iters;

        let now = started.elapsed().as_nanos() as u64;
        let wall = now - last_wall;
        last_wall = now;
        trace.push(TraceRecord {
            run_id: run_id.clone(),
            algo: "homotopy".into(),
            k,
            j: epoch.inner_iters,
            f: obj.value(&x),
            grad_norm: g.norm(),
            delta: Some(-mu),
            theta: None,
            h: None,
            mu: Some(mu),
            rho: Some(epoch.rho),
            krylov_iters: etrace.krylov_iters,
            matvecs: etrace.matvecs,
            wall_ns: wall,
            status: "epoch".into(),
        });

        mu *= epoch.rho;
        epoch_results.push(epoch);
    }
    if g.norm() <= cfg.eps {
        status = RunStatus::Success;
    }

    if let Some(last) = trace.last_mut() {
        last.status = status.to_string();
    }

    Ok(HomotopyRun {
        f: obj.value(&x),
        grad_norm: g.norm(),
        x,
        status,
        epochs: epochs_done,
        ghm_solves: ghm_total,
        krylov_iters: krylov_total,
        trace,
        epoch_results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{matrix_balancing_objective, quadratic_objective};
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn initial_mu_pinned_examples() {
        assert_relative_eq!(initial_mu(1.0, 0.0), 4.0, epsilon = 1e-15);
        assert_relative_eq!(initial_mu(0.0, 1.0), 4.0, epsilon = 1e-15);
        assert_relative_eq!(initial_mu(3.0, 2.0), 60.0, epsilon = 1e-15);
    }

    #[test]
    fn shrink_factor_pinned_examples() {
        assert_relative_eq!(shrink_factor(0.0, 1.0), 6.0 / 7.0, epsilon = 1e-15);
        assert_relative_eq!(shrink_factor(0.0, 0.0), 3.0 / 4.0, epsilon = 1e-15);
        assert_relative_eq!(shrink_factor(1.0, 1.0), 12.0 / 13.0, epsilon = 1e-15);
        assert!(shrink_factor(1e9, 5.0) < 1.0);
    }

    #[test]
    fn inner_budget_matches_hand_computation() {
        assert_eq!(inner_budget_t(1.0), 2);
        assert!(inner_budget_t(1e6) >= 1);
    }

    #[test]
    fn centering_step_on_the_sphere_obeys_multiplier_bounds() {
        let obj = quadratic_objective(DMatrix::identity(2, 2), DVector::zeros(2));
        let x = dvector![1.0, 0.0];
        let mu = 1.0;
        let (d, sol) = homotopy_ghm_step(&obj, &x, mu, 1e-12, None, 3).unwrap();
        let phi = obj.gradient(&x) + &x * mu;
        // theta = sqrt(5), step = -phi / (1 + theta).
        assert_relative_eq!(sol.theta, 5.0f64.sqrt(), epsilon = 1e-9);
        assert!(sol.theta - mu <= phi.norm() + 1e-12);
        assert!(d.norm() <= phi.norm() / mu + 1e-12);
        let expected = -&phi / (1.0 + 5.0f64.sqrt());
        assert_relative_eq!((d - expected).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn centered_point_yields_zero_step() {
        let obj = quadratic_objective(DMatrix::identity(2, 2), DVector::zeros(2));
        let x = DVector::zeros(2);
        let (d, _) = homotopy_ghm_step(&obj, &x, 1.0, 1e-12, None, 3).unwrap();
        assert!(d.norm() <= 1e-8);
    }

    #[test]
    fn exponential_step_respects_curvature_bound() {
        let obj = crate::problems::Exp1dObjective;
        let x = dvector![0.0];
        let mu = 4.0;
        let (d, _) = homotopy_ghm_step(&obj, &x, mu, 1e-12, None, 3).unwrap();
        let phi = obj.gradient(&x) + &x * mu;
        let curvature = d.dot(&obj.hess_vec(&x, &d));
        assert!(curvature <= phi.norm_squared() / mu + 1e-12);
    }

    #[test]
    fn hard_case_is_reported_as_nonconvexity() {
        let obj = quadratic_objective(
            DMatrix::from_diagonal(&dvector![-10.0, 2.0]),
            DVector::zeros(2),
        );
        let x = dvector![0.0, 1.0];
        let err = homotopy_ghm_step(&obj, &x, 0.1, 1e-12, None, 3).unwrap_err();
        assert!(matches!(err, Error::ConvexityViolation { lambda1 } if lambda1 < 0.0));
    }

    #[test]
    fn centering_meets_threshold_within_three_steps_on_a_quadratic() {
        let obj = quadratic_objective(DMatrix::from_diagonal(&dvector![1.0, 2.0]), DVector::zeros(2));
        let cfg = HomotopyConfig::default();
        let mu = 4.0;
        let mut warm = None;
        let (epoch, _) = iacghm_recorded(&obj, &dvector![1.0, 1.0], mu, &cfg, &mut warm).unwrap();
        assert!(epoch.inner_iters <= 3, "took {} steps", epoch.inner_iters);
        assert!(epoch.centering_residual <= cfg.centering_threshold(mu));
        assert!(epoch.rho < 1.0);
    }

    #[test]
    fn already_centered_start_returns_immediately() {
        let obj = quadratic_objective(DMatrix::identity(2, 2), DVector::zeros(2));
        let mut warm = None;
        let (epoch, trace) =
            iacghm_recorded(&obj, &DVector::zeros(2), 1.0, &HomotopyConfig::default(), &mut warm)
                .unwrap();
        assert_eq!(epoch.inner_iters, 0);
        assert_eq!(epoch.centering_residual, 0.0);
        assert_eq!(trace.ghm_solves, 0);
    }

    #[test]
    fn first_epoch_residuals_contract_quadratically() {
        let obj = quadratic_objective(
            DMatrix::from_diagonal(&dvector![1.0, 2.0]),
            dvector![1.0, 1.0],
        );
        let cfg = HomotopyConfig::default();
        let x0 = DVector::zeros(2);
        let mu0 = initial_mu(obj.gradient(&x0).norm(), cfg.beta);
        let mut warm = None;
        let (_, trace) = iacghm_recorded(&obj, &x0, mu0, &cfg, &mut warm).unwrap();
        let e = &trace.residuals;
        if e.len() > 1 {
            assert!(e[1] <= 0.5 + 1e-12, "e1 = {}", e[1]);
            for w in e[1..].windows(2) {
                assert!(w[1] <= w[0] * w[0] * 1.01 + 1e-15, "chain broke: {w:?}");
            }
        }
    }

    #[test]
    fn full_run_finds_the_quadratic_minimizer() {
        let target = dvector![0.3, -0.7, 0.4];
        let obj = quadratic_objective(DMatrix::identity(3, 3), -target.clone());
        let cfg = HomotopyConfig::default();
        let run = homotopy_hsodm(&obj, &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Success);
        assert!(run.grad_norm <= cfg.eps);
        assert!((run.x - target).norm() <= 1e-7);
        // mu decays strictly and every realized shrink stays under 1.
        let mus: Vec<f64> = run.trace.iter().filter_map(|r| r.mu).collect();
        for w in mus.windows(2) {
            assert!(w[1] < w[0]);
        }
        for e in &run.epoch_results {
            assert!(e.rho < 1.0 - 1e-6);
        }
    }

    #[test]
    fn balancing_run_reaches_a_stationary_scaling() {
        let mut a = DMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    a[(i, j)] = 1.0 + ((3 * i + j) % 5) as f64;
                }
            }
        }
        let obj = matrix_balancing_objective(a).unwrap();
        let mut cfg = HomotopyConfig::default();
        cfg.beta = obj.concordance_beta().unwrap();
        cfg.eps = 1e-7;
        let run = homotopy_hsodm(&obj, &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Success);
        assert!(run.grad_norm <= 1e-7);
    }

    #[test]
    fn warm_start_never_costs_extra_lanczos_iterations() {
        let obj = quadratic_objective(
            DMatrix::from_diagonal(&dvector![1.0, 3.0, 5.0]),
            dvector![1.0, -2.0, 0.5],
        );
        let mut cfg = HomotopyConfig::default();
        cfg.warm_start = true;
        let warm_run = homotopy_hsodm(&obj, &cfg).unwrap();
        cfg.warm_start = false;
        let cold_run = homotopy_hsodm(&obj, &cfg).unwrap();
        assert_eq!(warm_run.status, RunStatus::Success);
        assert_eq!(cold_run.status, RunStatus::Success);
        assert!(warm_run.krylov_iters <= cold_run.krylov_iters);
    }
}
