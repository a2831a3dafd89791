//! Classical steps realized through the bordered eigenvalue model (trust
//! region, gradient-regularized Newton) plus the inexact-Newton line-search
//! baseline they are compared against.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ghm::GhmContext;
use crate::krylov::{cg_solve, gmres_solve, ShiftedOperator, SymmetricOperator};
use crate::problems::{HessianAt, Objective};
use crate::rootfind::{bisect_for_radius, newton_for_theta, RadiusOutcome};
use crate::trace::{RunStatus, TraceRecord};

const EIG_TOL: f64 = 1e-12;
const STEP_SEED: u64 = 0x7e57;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    Boundary,
    Interior,
    Shifted,
}

/// A single computed step with its multiplier and solve telemetry.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub d: DVector<f64>,
    /// Shift applied to the Hessian at the solution: the trust-region
    /// multiplier, the regularizer `gamma ||g||^(1/2)`, or zero when the
    /// Newton step was interior.
    pub multiplier: f64,
    pub ghm_solves: usize,
    pub krylov_iters: usize,
    pub mode: StepMode,
}

/// `P (H + shift I) P + cap v v'` with `P = I - v v'`: the shifted Hessian
/// deflated against the leftmost eigenvector, so CG only ever sees the
/// strictly positive part of the shifted spectrum.
struct DeflatedShifted<'a> {
    inner: &'a dyn SymmetricOperator,
    shift: f64,
    v: &'a DVector<f64>,
    cap: f64,
}

impl SymmetricOperator for DeflatedShifted<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let along = self.v.dot(x);
        let xp = x - self.v * along;
        let mut y = self.inner.apply(&xp);
        y.axpy(self.shift, &xp, 1.0);
        let off = self.v.dot(&y);
        y.axpy(self.cap * along - off, self.v, 1.0);
        y
    }

    fn matvec_count(&self) -> usize {
        self.inner.matvec_count()
    }

    fn reset_matvec_count(&self) {
        self.inner.reset_matvec_count()
    }
}

/// Boundary solution when the gradient is (numerically) orthogonal to the
/// leftmost eigenspace: pin the multiplier at `-lambda1`, solve for the
/// regular component on the deflated complement, and fill the remaining
/// radius along the eigenvector.
fn hard_case_boundary(
    hess: &dyn SymmetricOperator,
    g: &DVector<f64>,
    radius: f64,
    lambda1: f64,
    v: &DVector<f64>,
) -> Result<StepResult> {
    let n = hess.dim();
    let theta = -lambda1;
    let cap = theta.abs().max(1.0);
    let deflated = DeflatedShifted {
        inner: hess,
        shift: theta,
        v,
        cap,
    };
    let rhs = v * g.dot(v) - g;
    let lin = cg_solve(&deflated, &rhs, 1e-12, 40 * n.max(10))?;
    let y = lin.solution;
    let gap = radius * radius - y.norm_squared();
    if theta <= 0.0 || gap < 0.0 {
        // Regular part alone overshoots the ball: not actually a hard case.
        return Err(Error::HardCase {
            lambda1,
            eigvec: Box::new(v.clone()),
            t_abs: 0.0,
        });
    }
    Ok(StepResult {
        d: &y + v * gap.sqrt(),
        multiplier: theta,
        ghm_solves: 0,
        krylov_iters: lin.iters,
        mode: StepMode::Boundary,
    })
}

/// Trust-region step: minimizes the quadratic model over `||d|| <= radius`.
/// A hard-case instance (gradient orthogonal to the leftmost eigenspace) is
/// retried once with the gradient nudged by `1e-10 ||g||` along that
/// eigenvector; if the nudge is below the eigensolver's resolution of the
/// pinch, the boundary solution is completed along the eigenvector instead.
pub fn trs_step(hess: &dyn SymmetricOperator, g: &DVector<f64>, radius: f64) -> Result<StepResult> {
    if !(radius > 0.0) || g.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "trust-region step needs radius > 0 and a nonzero gradient".into(),
        ));
    }

    let attempt = |phi: DVector<f64>, tol: f64| -> Result<StepResult> {
        let ctx = GhmContext::new(hess, phi, EIG_TOL, STEP_SEED);
        let search = bisect_for_radius(&ctx, radius, tol, 400)?;
        Ok(match search.outcome {
            RadiusOutcome::Boundary { sol, .. } => StepResult {
                d: sol.d.clone().expect("boundary solutions carry a step"),
                multiplier: sol.theta,
                ghm_solves: search.ghm_solves,
                krylov_iters: search.krylov_iters,
                mode: StepMode::Boundary,
            },
            RadiusOutcome::Interior {
                newton_step,
                cg_iters,
            } => StepResult {
                d: newton_step,
                multiplier: 0.0,
                ghm_solves: search.ghm_solves,
                krylov_iters: search.krylov_iters + cg_iters,
                mode: StepMode::Interior,
            },
        })
    };

    match attempt(g.clone(), 1e-9) {
        Err(Error::HardCase {
            lambda1, eigvec, ..
        }) => {
            // Near the hard-case pinch the radius window is narrower than a
            // float in delta at the tight tolerance, so the retry accepts a
            // norm within 1e-6 of the radius instead.
            let nudged = g + &*eigvec * (1e-10 * g.norm());
            match attempt(nudged, 1e-6) {
                Err(Error::HardCase { .. }) => {
                    hard_case_boundary(hess, g, radius, lambda1, &eigvec)
                }
                other => other,
            }
        }
        other => other,
    }
}

/// Gradient-regularized Newton step `d = -(H + gamma ||g||^(1/2) I)^{-1} g`,
/// computed by driving the bordered model's multiplier to half the
/// regularizer on the pre-shifted Hessian `H + (reg/2) I`.
pub fn gradreg_step(
    hess: &dyn SymmetricOperator,
    g: &DVector<f64>,
    gamma_coeff: f64,
) -> Result<StepResult> {
    let g_norm = g.norm();
    if !(gamma_coeff > 0.0) || g_norm == 0.0 {
        return Err(Error::InvalidInput(
            "regularized step needs gamma > 0 and a nonzero gradient".into(),
        ));
    }
    let reg = gamma_coeff * g_norm.sqrt();
    let target = 0.5 * reg;
    let shifted = ShiftedOperator::new(hess, target);
    let ctx = GhmContext::new(&shifted, g.clone(), EIG_TOL, STEP_SEED);
    // |theta - reg/2| <= 0.5e-8 reg keeps the step residual within
    // 1e-8 ||g|| because ||d|| <= 2 ||g|| / reg on semidefinite input.
    let search = newton_for_theta(&ctx, target, 0.5e-8 * reg, 200)?;
    Ok(StepResult {
        d: search
            .sol
            .d
            .clone()
            .expect("a positive multiplier target forces an explicit step"),
        multiplier: reg,
        ghm_solves: search.ghm_solves,
        krylov_iters: search.krylov_iters,
        mode: StepMode::Shifted,
    })
}

/// Tuning for [`inexact_newton`]. The linear tolerance tightens once the
/// gradient falls under `switch_grad_norm`.
#[derive(Debug, Clone)]
pub struct NewtonParams {
    pub lin_tol: f64,
    pub lin_tol_tight: f64,
    pub switch_grad_norm: f64,
    pub use_gmres: bool,
    pub gmres_restart: Option<usize>,
    pub eps: f64,
    pub max_outer: usize,
    pub max_backtracks: usize,
    pub c1: f64,
    /// Per-solve Krylov budget; `None` means 20 n.
    pub max_lin_iters: Option<usize>,
    pub seed: u64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            lin_tol: 1e-6,
            lin_tol_tight: 1e-8,
            switch_grad_norm: 1e-4,
            use_gmres: false,
            gmres_restart: None,
            eps: 1e-8,
            max_outer: 200,
            max_backtracks: 50,
            c1: 1e-4,
            max_lin_iters: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonRun {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub status: RunStatus,
    pub outer_iters: usize,
    pub krylov_iters: usize,
    pub matvecs: usize,
    pub trace: Vec<TraceRecord>,
}

/// Inexact Newton with Armijo backtracking: each iteration solves
/// `H d = -g` to the scheduled tolerance by CG (or GMRES), then halves the
/// step until `f(x + a d) <= f(x) + c1 a g'd`.
pub fn inexact_newton(
    obj: &dyn Objective,
    x0: &DVector<f64>,
    params: &NewtonParams,
) -> Result<NewtonRun> {
    let n = obj.dim();
    assert_eq!(x0.len(), n);
    let lin_cap = params.max_lin_iters.unwrap_or(20 * n);
    let run_id = format!("inewton-{:016x}", params.seed);
    let started = Instant::now();
    let mut last_wall = 0u64;

    let mut x = x0.clone();
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut status = RunStatus::Budget;
    let mut steps = 0usize;
    let mut krylov_total = 0usize;
    let mut matvec_total = 0usize;
    let mut trace = Vec::new();

    for k in 0..params.max_outer {
        if g.norm() <= params.eps {
            status = RunStatus::Success;
            break;
        }
        let hess = HessianAt::new(obj, x.clone());
        let tol = if g.norm() <= params.switch_grad_norm {
            params.lin_tol_tight
        } else {
            params.lin_tol
        };
        // The Krylov solvers stop at ||r|| <= tol * max(1, ||b||); rescale so
        // the forcing term is relative to ||g|| even when ||g|| < 1.
        let tol = tol * g.norm().min(1.0);
        let rhs = -&g;
        let lin = if params.use_gmres {
            gmres_solve(&hess, &rhs, tol, lin_cap, params.gmres_restart)?
        } else {
            cg_solve(&hess, &rhs, tol, lin_cap)?
        };
        krylov_total += lin.iters;
        let mut d = lin.solution;
        let mut slope = g.dot(&d);
        if slope >= 0.0 {
            // The inexact solve failed to produce descent; fall back to the
            // gradient direction rather than stalling.
            d = -&g;
            slope = -g.norm_squared();
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=params.max_backtracks {
            let trial = &x + &d * alpha;
            let f_trial = obj.value(&trial);
            if f_trial <= f + params.c1 * alpha * slope {
                x = trial;
                f = f_trial;
                g = obj.gradient(&x);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        matvec_total += hess.matvec_count();

        let now = started.elapsed().as_nanos() as u64;
        let wall = now - last_wall;
        last_wall = now;
        trace.push(TraceRecord {
            run_id: run_id.clone(),
            algo: "inewton".into(),
            k,
            j: 0,
            f,
            grad_norm: g.norm(),
            delta: None,
            theta: None,
            h: None,
            mu: None,
            rho: Some(alpha),
            krylov_iters: lin.iters,
            matvecs: hess.matvec_count(),
            wall_ns: wall,
            status: if accepted { "accepted".into() } else { "stalled".into() },
        });

        if !accepted {
            status = RunStatus::Stalled;
            break;
        }
        steps = k + 1;
    }
    if status == RunStatus::Budget && g.norm() <= params.eps {
        status = RunStatus::Success;
    }
    if let Some(last) = trace.last_mut() {
        if status != RunStatus::Stalled {
            last.status = status.to_string();
        }
    }

    Ok(NewtonRun {
        f,
        grad_norm: g.norm(),
        x,
        status,
        outer_iters: steps,
        krylov_iters: krylov_total,
        matvecs: matvec_total,
        trace,
    })
}
