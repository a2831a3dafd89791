//! Fully adaptive second-order driver: a cubic-model ratio test steers an
//! interval on sqrt(h), each outer step pins h into that interval by
//! bisection on the bordered model's delta, and a perturbation loop escapes
//! hard-case points. Terminates at approximate second-order stationarity.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ghm::{GhmContext, GhmSolution};
use crate::krylov::{lanczos_leftmost, SymmetricOperator};
use crate::problems::{HessianAt, Objective};
use crate::rootfind::{solve_strict, TargetInterval};
use crate::trace::{RunStatus, TraceRecord};

/// Tuning for [`adaptive_hsodm`]. `delta0 = None` seeds the first solve at
/// `-||g(x0)||`.
#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub h_min: f64,
    pub sigma: f64,
    pub kappa_phi: f64,
    pub eps: f64,
    pub delta0: Option<f64>,
    pub rho0: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub eig_tol: f64,
    pub seed: u64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            eta1: 0.1,
            eta2: 0.9,
            gamma1: 2.0,
            gamma2: 2.0,
            gamma3: 4.0,
            gamma4: 0.8,
            h_min: 1e-6,
            sigma: 1e-6,
            kappa_phi: 1.0,
            eps: 1e-8,
            delta0: None,
            rho0: 0.5,
            max_outer: 500,
            max_inner: 100,
            eig_tol: 1e-10,
            seed: 0,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.eta1
            && self.eta1 < self.eta2
            && self.eta2 < 1.0
            && self.gamma1 > 1.0
            && self.gamma2 > 1.0
            && self.gamma3 >= self.gamma2
            && self.gamma4 > 0.0
            && self.gamma4 <= 1.0
            && self.h_min > 0.0
            && self.sigma > 0.0
            && self.kappa_phi > 0.0
            && self.eps > 0.0
            && self.rho0 >= self.eta1
            && self.rho0 < self.eta2
            && self.max_outer >= 1
            && self.max_inner >= 1
            && self.eig_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "adaptive config violates parameter ordering constraints".into(),
            ))
        }
    }
}

/// Next interval on sqrt(h), keyed by how the previous step fared. The lower
/// endpoint never drops below sqrt(h_min).
pub fn interval_update(rho_prev: f64, h_prev: f64, cfg: &AdaptiveConfig) -> (f64, f64) {
    let root = h_prev.sqrt();
    let floor = cfg.h_min.sqrt();
    let (lo, hi) = if rho_prev > cfg.eta2 {
        (cfg.gamma4 * root, root)
    } else if rho_prev >= cfg.eta1 {
        (root / cfg.gamma1, cfg.gamma2 * root)
    } else {
        (cfg.gamma2 * root, cfg.gamma3 * root)
    };
    let lo = lo.max(floor);
    (lo, hi.max(lo))
}

/// Decrement of the cubic model at step `d`:
/// `phi'd + d'Hd/2 + (sqrt(h)/3) ||d||^3`.
pub fn cubic_model_value(
    phi: &DVector<f64>,
    hess: &dyn SymmetricOperator,
    h: f64,
    d: &DVector<f64>,
) -> f64 {
    assert!(h >= 0.0);
    phi.dot(d) + 0.5 * d.dot(&hess.apply(d)) + h.sqrt() / 3.0 * d.norm().powi(3)
}

/// Actual-over-predicted decrease. A model decrement indistinguishable from
/// rounding returns negative infinity so the step is treated unsuccessful.
pub fn ratio_test(f_old: f64, f_new: f64, model_decrement: f64) -> f64 {
    if model_decrement.abs() < 1e-14 * f_old.abs().max(1.0) {
        return f64::NEG_INFINITY;
    }
    (f_new - f_old) / model_decrement
}

/// Drives `h` into `target` by bisecting delta, growing a bracket outward
/// from `seed_delta` first. Returns the delta and solution whose `h` lands
/// in the window. Hard-case solves surface as [`Error::HardCase`].
pub fn solve_into_interval(
    ctx: &GhmContext,
    target: TargetInterval,
    seed_delta: f64,
    max_steps: usize,
) -> Result<(f64, GhmSolution)> {
    let sol = solve_strict(ctx, seed_delta)?;
    if target.contains(sol.h) {
        return Ok((seed_delta, sol));
    }

    // h is non-increasing in delta: march the deficient side outward.
    let (mut lo, mut hi) = (seed_delta, seed_delta);
    let mut grow = 1.0;
    if sol.h > target.hi + target.sigma {
        for _ in 0..60 {
            hi += grow * (1.0 + hi.abs());
            grow *= 2.0;
            let s = solve_strict(ctx, hi)?;
            if target.contains(s.h) {
                return Ok((hi, s));
            }
            if s.h < target.lo {
                break;
            }
            lo = hi;
        }
    } else {
        for _ in 0..60 {
            lo -= grow * (1.0 + lo.abs());
            grow *= 2.0;
            let s = solve_strict(ctx, lo)?;
            if target.contains(s.h) {
                return Ok((lo, s));
            }
            if s.h > target.hi + target.sigma {
                break;
            }
            hi = lo;
        }
    }
    if lo >= hi {
        return Err(Error::BisectionBudget { steps: 60 });
    }

    for _ in 0..max_steps {
        let width = hi - lo;
        if width <= 1e-15 * lo.abs().max(hi.abs()).max(1.0) {
            return Err(Error::DegenerateInterval { width });
        }
        let mid = 0.5 * (lo + hi);
        let s = solve_strict(ctx, mid)?;
        if target.contains(s.h) {
            return Ok((mid, s));
        }
        if s.h > target.hi + target.sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BisectionBudget { steps: max_steps })
}

/// Result of a hard-case perturbation escape.
#[derive(Debug, Clone)]
pub struct EscapeOutcome {
    pub d: DVector<f64>,
    pub h_new: f64,
    pub phi_used: DVector<f64>,
    pub inner_solves: usize,
    pub krylov_iters: usize,
    pub rho: f64,
    pub f_new: f64,
    pub escalations: usize,
    pub delta: f64,
    pub theta: f64,
}

/// Escapes a hard-case point by tilting the model's linear term off the
/// gradient: `phi = g + (kappa_phi lambda1^2 / (gamma3^2 h)) v` where
/// `(lambda1, v)` is the leftmost Hessian pair. On rejection the regularizer
/// target is raised and the perturbation rebuilt until the ratio test
/// accepts.
pub fn hard_case_escape(
    obj: &dyn Objective,
    x: &DVector<f64>,
    g: &DVector<f64>,
    leftmost: (f64, &DVector<f64>),
    h_prev: f64,
    cfg: &AdaptiveConfig,
) -> Result<EscapeOutcome> {
    let (lambda1, v) = leftmost;
    if lambda1 >= 0.0 {
        return Err(Error::InvalidInput(
            "hard-case escape requires negative leftmost curvature".into(),
        ));
    }
    let f_old = obj.value(x);
    let hess = HessianAt::new(obj, x.clone());
    let mut cur_h = h_prev.max(cfg.h_min);
    let mut total_solves = 0usize;
    let mut total_krylov = 0usize;
    const MAX_ESCALATIONS: usize = 64;

    for escalation in 0..MAX_ESCALATIONS {
        let coeff = cfg.kappa_phi * lambda1 * lambda1 / (cfg.gamma3 * cfg.gamma3 * cur_h);
        let phi = g + v * coeff;
        let ctx = GhmContext::new(
            &hess,
            phi.clone(),
            cfg.eig_tol,
            cfg.seed.wrapping_add(escalation as u64),
        );
        let lo = cfg.gamma2 * cur_h.sqrt();
        let hi = cfg.gamma3 * cur_h.sqrt();
        let target = TargetInterval::new(lo * lo, hi * hi, cfg.sigma);
        let seed_delta = -lambda1.abs().max(ctx.phi_norm());
        let attempt = solve_into_interval(&ctx, target, seed_delta, cfg.max_inner);
        total_solves += ctx.solves();
        total_krylov += ctx.krylov_iters();

        match attempt {
            Ok((delta, sol)) => {
                if let Some(d) = sol.d.clone() {
                    let f_new = obj.value(&(x + &d));
                    let decrement = cubic_model_value(&phi, &hess, sol.h, &d);
                    let rho = ratio_test(f_old, f_new, decrement);
                    if rho >= cfg.eta1 {
                        return Ok(EscapeOutcome {
                            d,
                            h_new: sol.h,
                            phi_used: phi,
                            inner_solves: total_solves,
                            krylov_iters: total_krylov,
                            rho,
                            f_new,
                            escalations: escalation,
                            delta,
                            theta: sol.theta,
                        });
                    }
                    cur_h = sol.h;
                } else {
                    cur_h *= cfg.gamma2 * cfg.gamma2;
                }
            }
            // A recurring hard case or an unbracketable window both mean the
            // perturbation was too timid at this scale; raise and retry.
            Err(Error::HardCase { .. })
            | Err(Error::BisectionBudget { .. })
            | Err(Error::DegenerateInterval { .. }) => {
                cur_h *= cfg.gamma2 * cfg.gamma2;
            }
            Err(e) => return Err(e),
        }

        if total_solves > cfg.max_inner {
            return Err(Error::EscapeFailed {
                escalations: escalation + 1,
                h_entry: h_prev,
                lambda1,
            });
        }
    }
    Err(Error::EscapeFailed {
        escalations: MAX_ESCALATIONS,
        h_entry: h_prev,
        lambda1,
    })
}

/// Completed run of the adaptive driver.
#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub status: RunStatus,
    pub outer_iters: usize,
    pub ghm_solves: usize,
    pub krylov_iters: usize,
    pub matvecs: usize,
    pub trace: Vec<TraceRecord>,
}

struct StepProposal {
    d: DVector<f64>,
    h: f64,
    delta: f64,
    theta: f64,
    pre: Option<(f64, f64)>,
    escaped: bool,
}

/// Minimizes `obj` from `x0` to a point with `||g|| <= eps` and leftmost
/// Hessian curvature at least `-sqrt(eps)`. The trace carries one row per
/// outer iteration; `j` counts the model solves that iteration consumed.
pub fn adaptive_hsodm(
    obj: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &AdaptiveConfig,
) -> Result<AdaptiveRun> {
    cfg.validate()?;
    let n = obj.dim();
    assert_eq!(x0.len(), n);
    let run_id = format!("adaptive-{:016x}", cfg.seed);
    let started = Instant::now();
    let mut last_wall = 0u64;

    let mut x = x0.clone();
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut h_prev: Option<f64> = None;
    let mut rho_prev = cfg.rho0;
    let mut delta_seed = cfg.delta0.unwrap_or(-g.norm());
    let mut status = RunStatus::Budget;

    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut outer_done = 0usize;
    let mut ghm_total = 0usize;
    let mut krylov_total = 0usize;
    let mut matvec_total = 0usize;

    let mut push_row = |trace: &mut Vec<TraceRecord>,
                        k: usize,
                        j: usize,
                        f: f64,
                        gn: f64,
                        delta: Option<f64>,
                        theta: Option<f64>,
                        h: Option<f64>,
                        rho: Option<f64>,
                        kry: usize,
                        mv: usize,
                        status: &str| {
        let now = started.elapsed().as_nanos() as u64;
        let wall = now - last_wall;
        last_wall = now;
        trace.push(TraceRecord {
            run_id: run_id.clone(),
            algo: "adaptive".into(),
            k,
            j,
            f,
            grad_norm: gn,
            delta,
            theta,
            h,
            mu: None,
            rho,
            krylov_iters: kry,
            matvecs: mv,
            wall_ns: wall,
            status: status.into(),
        });
    };

    'outer: for k in 0..cfg.max_outer {
        outer_done = k + 1;
        let hess = HessianAt::new(obj, x.clone());

        // Termination is certified, not assumed: a small gradient alone does
        // not end the run until the leftmost curvature clears -sqrt(eps).
        if g.norm() <= cfg.eps {
            match lanczos_leftmost(
                &hess,
                cfg.eig_tol,
                (4 * n).max(32),
                None,
                cfg.seed.wrapping_add(k as u64),
            ) {
                Ok(eig) => {
                    krylov_total += eig.iters;
                    if eig.value >= -cfg.eps.sqrt() {
                        status = RunStatus::Success;
                        matvec_total += hess.matvec_count();
                        push_row(
                            &mut trace,
                            k,
                            0,
                            f,
                            g.norm(),
                            None,
                            None,
                            None,
                            None,
                            eig.iters,
                            hess.matvec_count(),
                            "success",
                        );
                        break 'outer;
                    }
                }
                Err(_) => {
                    // Could not certify curvature; keep iterating.
                }
            }
        }

        let ctx = GhmContext::new(&hess, g.clone(), cfg.eig_tol, cfg.seed.wrapping_add(k as u64));

        let search = match h_prev {
            Some(hp) => {
                let (a, b) = interval_update(rho_prev, hp, cfg);
                let target = TargetInterval::new(a * a, b * b, cfg.sigma);
                solve_into_interval(&ctx, target, delta_seed, cfg.max_inner)
            }
            None => {
                // First iteration: probe once at the seed delta to learn the
                // curvature scale, then pull h into the floored window.
                match solve_strict(&ctx, delta_seed) {
                    Ok(probe) => {
                        let h0 = probe.h.max(cfg.h_min);
                        let (a, b) = interval_update(cfg.rho0, h0, cfg);
                        let target = TargetInterval::new(a * a, b * b, cfg.sigma);
                        if target.contains(probe.h) {
                            Ok((delta_seed, probe))
                        } else {
                            solve_into_interval(&ctx, target, delta_seed, cfg.max_inner)
                        }
                    }
                    Err(e) => Err(e),
                }
            }
        };

        // An unbracketable window is not fatal: fall back to the raw seed
        // solve and let the ratio test arbitrate.
        let search = match search {
            Err(Error::BisectionBudget { .. }) | Err(Error::DegenerateInterval { .. }) => {
                solve_strict(&ctx, delta_seed).map(|sol| (delta_seed, sol))
            }
            other => other,
        };

        // A semidefinite report carries no step; push delta firmly negative,
        // where lambda1(F) <= delta forces a strict eigen-step.
        let search = match search {
            Ok((delta, sol)) if sol.d.is_none() => {
                let push = delta.min(0.0) - (1.0 + delta.abs());
                solve_strict(&ctx, push).map(|s| (push, s))
            }
            other => other,
        };

        let proposal = match search {
            Ok((delta, sol)) => {
                let Some(d) = sol.d.clone() else {
                    status = RunStatus::Stalled;
                    ghm_total += ctx.solves();
                    krylov_total += ctx.krylov_iters();
                    matvec_total += hess.matvec_count();
                    push_row(
                        &mut trace,
                        k,
                        ctx.solves(),
                        f,
                        g.norm(),
                        Some(delta),
                        Some(sol.theta),
                        Some(sol.h),
                        None,
                        ctx.krylov_iters(),
                        hess.matvec_count(),
                        "stalled",
                    );
                    break 'outer;
                };
                StepProposal {
                    d,
                    h: sol.h,
                    delta,
                    theta: sol.theta,
                    pre: None,
                    escaped: false,
                }
            }
            Err(Error::HardCase {
                lambda1, eigvec, ..
            }) => {
                let hp = h_prev.unwrap_or(cfg.h_min);
                let esc = hard_case_escape(obj, &x, &g, (lambda1, &eigvec), hp, cfg)?;
                ghm_total += esc.inner_solves;
                krylov_total += esc.krylov_iters;
                StepProposal {
                    d: esc.d,
                    h: esc.h_new,
                    delta: esc.delta,
                    theta: esc.theta,
                    pre: Some((esc.f_new, esc.rho)),
                    escaped: true,
                }
            }
            Err(e) => return Err(e),
        };

        ghm_total += ctx.solves();
        krylov_total += ctx.krylov_iters();
        let inner_solves = ctx.solves();

        let (f_trial, rho) = match proposal.pre {
            Some(pair) => pair,
            None => {
                let f_trial = obj.value(&(&x + &proposal.d));
                let decrement = cubic_model_value(&g, &hess, proposal.h, &proposal.d);
                (f_trial, ratio_test(f, f_trial, decrement))
            }
        };

        // A vanishing model decrement with no actual increase usually means
        // the iterate is already stationary at this resolution: certify it
        // as a terminal point rather than churning rejections.
        if rho == f64::NEG_INFINITY && f_trial <= f + 1e-14 * f.abs().max(1.0) {
            let x_cand = &x + &proposal.d;
            let g_cand = obj.gradient(&x_cand);
            if g_cand.norm() <= cfg.eps {
                let cand_hess = HessianAt::new(obj, x_cand.clone());
                if let Ok(eig) = lanczos_leftmost(
                    &cand_hess,
                    cfg.eig_tol,
                    (4 * n).max(32),
                    None,
                    cfg.seed.wrapping_add(k as u64) ^ 0xA5A5,
                ) {
                    krylov_total += eig.iters;
                    matvec_total += cand_hess.matvec_count();
                    if eig.value >= -cfg.eps.sqrt() {
                        x = x_cand;
                        f = f_trial;
                        g = g_cand;
                        status = RunStatus::Success;
                        matvec_total += hess.matvec_count();
                        push_row(
                            &mut trace,
                            k,
                            inner_solves,
                            f,
                            g.norm(),
                            Some(proposal.delta),
                            Some(proposal.theta),
                            Some(proposal.h),
                            None,
                            ctx.krylov_iters(),
                            hess.matvec_count(),
                            "success",
                        );
                        break 'outer;
                    }
                }
            }
        }

        let accepted = rho >= cfg.eta1;
        if accepted {
            x = &x + &proposal.d;
            f = f_trial;
            g = obj.gradient(&x);
        }

        rho_prev = if rho.is_finite() { rho } else { -1.0 };
        h_prev = Some(proposal.h);
        delta_seed = proposal.delta;
        ctx.clear_warm_start();

        let row_status = if proposal.escaped {
            "escape"
        } else if accepted {
            "accepted"
        } else {
            "rejected"
        };
        matvec_total += hess.matvec_count();
        push_row(
            &mut trace,
            k,
            inner_solves,
            f,
            g.norm(),
            Some(proposal.delta),
            Some(proposal.theta),
            Some(proposal.h),
            rho.is_finite().then_some(rho),
            ctx.krylov_iters(),
            hess.matvec_count(),
            row_status,
        );
    }

    if status == RunStatus::Budget {
        if let Some(last) = trace.last_mut() {
            last.status = "budget".into();
        }
    }

    Ok(AdaptiveRun {
        grad_norm: g.norm(),
        x,
        f,
        status,
        outer_iters: outer_done,
        ghm_solves: ghm_total,
        krylov_iters: krylov_total,
        matvecs: matvec_total,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{synthetic_dataset, LabelModel};
    use crate::krylov::DenseOperator;
    use crate::problems::{
        logistic_l2_objective, quadratic_objective, quartic_objective, saddle_objective,
    };
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn config_validation_rejects_bad_orderings() {
        assert!(AdaptiveConfig::default().validate().is_ok());
        let mut bad = AdaptiveConfig::default();
        bad.eta2 = 0.05;
        assert!(bad.validate().is_err());
        let mut bad = AdaptiveConfig::default();
        bad.gamma3 = 1.5;
        assert!(bad.validate().is_err());
        let mut bad = AdaptiveConfig::default();
        bad.gamma4 = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = AdaptiveConfig::default();
        bad.rho0 = 0.95;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn interval_update_pinned_examples() {
        let mut cfg = AdaptiveConfig::default();
        cfg.gamma4 = 0.5;
        let (a, b) = interval_update(0.95, 4.0, &cfg);
        assert_relative_eq!(a, 1.0, epsilon = 1e-15);
        assert_relative_eq!(b, 2.0, epsilon = 1e-15);

        let cfg = AdaptiveConfig::default();
        let (a, b) = interval_update(0.5, 4.0, &cfg);
        assert_relative_eq!(a, 1.0, epsilon = 1e-15);
        assert_relative_eq!(b, 4.0, epsilon = 1e-15);

        let (a, b) = interval_update(0.01, 1.0, &cfg);
        assert_relative_eq!(a, 2.0, epsilon = 1e-15);
        assert_relative_eq!(b, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn interval_update_floors_at_h_min() {
        let cfg = AdaptiveConfig::default();
        let (a, b) = interval_update(0.95, cfg.h_min, &cfg);
        assert_relative_eq!(a, cfg.h_min.sqrt(), epsilon = 1e-18);
        assert!(b >= a);
    }

    #[test]
    fn cubic_model_pinned_examples() {
        let h2 = DenseOperator::new(DMatrix::identity(2, 2));
        let phi = dvector![1.0, 0.0];
        assert_eq!(cubic_model_value(&phi, &h2, 1.0, &DVector::zeros(2)), 0.0);
        assert_relative_eq!(
            cubic_model_value(&phi, &h2, 0.0, &dvector![-1.0, 0.0]),
            -0.5,
            epsilon = 1e-15
        );

        let golden = DenseOperator::new(DMatrix::from_diagonal(&dvector![-1.0, 2.0]));
        let root = (1.0 + 5.0f64.sqrt()) / 2.0;
        let d = dvector![-root, 0.0];
        let decrement = cubic_model_value(&phi, &golden, 1.0, &d);
        assert!(decrement < 0.0);
        assert!(-decrement >= root.powi(3) / 6.0 - 1e-12);
        assert_relative_eq!(decrement, -root - 0.5 * root * root + root.powi(3) / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ratio_test_pinned_examples() {
        assert_relative_eq!(ratio_test(1.0, 0.0, -1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(ratio_test(1.0, 1.0, -1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(ratio_test(1.0, 0.5, -1.0), 0.5, epsilon = 1e-15);
        let sentinel = ratio_test(1.0, 0.9, 1e-16);
        assert!(sentinel.is_infinite() && sentinel < 0.0);
    }

    #[test]
    fn solve_into_interval_recovers_from_bad_seeds() {
        let hess = DenseOperator::new(DMatrix::identity(2, 2));
        let ctx = GhmContext::new(&hess, dvector![1.0, 0.0], 1e-10, 7);
        let target = TargetInterval::new(0.5, 1.0, 1e-6);
        for seed_delta in [-10.0, 10.0, 0.0] {
            let (delta, sol) = solve_into_interval(&ctx, target, seed_delta, 200).unwrap();
            assert!(target.contains(sol.h), "h = {} from seed {seed_delta}", sol.h);
            let again = solve_strict(&ctx, delta).unwrap();
            assert_relative_eq!(again.h, sol.h, max_relative = 1e-9);
        }
    }

    #[test]
    fn escape_perturbation_is_pinned_on_the_saddle() {
        let obj = saddle_objective();
        let x = dvector![0.0, 1.0];
        let g = obj.gradient(&x);
        let v = dvector![1.0, 0.0];
        let cfg = AdaptiveConfig::default();
        let esc = hard_case_escape(&obj, &x, &g, (-1.0, &v), 1.0, &cfg).unwrap();
        assert_eq!(esc.escalations, 0);
        let dev = &esc.phi_used - &g;
        assert_relative_eq!(dev.norm(), 1.0 / 16.0, epsilon = 1e-12);
        assert_relative_eq!(dev[0], 1.0 / 16.0, epsilon = 1e-12);
        assert!(esc.d[0].abs() > 0.0);
        assert!(esc.rho >= cfg.eta1);
        assert!(esc.f_new < obj.value(&x));
        // The accepted perturbation obeys the step-size-squared bound.
        assert!(dev.norm() <= cfg.kappa_phi * esc.d.norm_squared() + 1e-12);
    }

    #[test]
    fn sphere_run_converges_to_the_origin() {
        let obj = quadratic_objective(DMatrix::identity(2, 2), DVector::zeros(2));
        let cfg = AdaptiveConfig::default();
        let run = adaptive_hsodm(&obj, &dvector![1.0, 1.0], &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Success);
        assert!(run.grad_norm <= cfg.eps);
        assert!(run.x.norm() <= cfg.eps);
        assert!(!run.trace.is_empty());
        assert_eq!(run.trace.last().unwrap().status, "success");
    }

    #[test]
    fn quartic_run_lands_on_a_second_order_point() {
        let obj = quartic_objective();
        let cfg = AdaptiveConfig::default();
        let run = adaptive_hsodm(&obj, &dvector![0.1, 1.0], &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Success);
        assert!(run.grad_norm <= cfg.eps);
        assert_relative_eq!(run.f, -0.25, epsilon = 1e-6);
        // Second-order certificate: curvature along x1 must be positive.
        assert!(run.x[0].abs() >= 1.0 / 3.0f64.sqrt() - 1e-6);
    }

    #[test]
    fn accepted_rows_decrease_f_monotonically() {
        let obj = quartic_objective();
        let run = adaptive_hsodm(&obj, &dvector![0.4, -0.8], &AdaptiveConfig::default()).unwrap();
        let mut prev = f64::INFINITY;
        for row in &run.trace {
            if row.status == "accepted" || row.status == "escape" || row.status == "success" {
                assert!(row.f < prev + 1e-14, "f did not decrease: {} -> {}", prev, row.f);
                prev = row.f;
            }
            if let Some(h) = row.h {
                assert!(h >= AdaptiveConfig::default().h_min - 1e-18);
            }
        }
    }

    #[test]
    fn budget_status_when_starved() {
        let obj = quartic_objective();
        let mut cfg = AdaptiveConfig::default();
        cfg.max_outer = 1;
        let run = adaptive_hsodm(&obj, &dvector![0.1, 1.0], &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Budget);
        assert_eq!(run.outer_iters, 1);
        assert_eq!(run.trace.last().unwrap().status, "budget");
    }

    #[test]
    fn logistic_run_reaches_tight_stationarity() {
        let data = synthetic_dataset(11, 8, 60, 0.6, LabelModel::Sign);
        let obj = logistic_l2_objective(data, 1e-2).unwrap();
        let cfg = AdaptiveConfig::default();
        let run = adaptive_hsodm(&obj, &DVector::zeros(8), &cfg).unwrap();
        assert_eq!(run.status, RunStatus::Success);
        assert!(run.grad_norm <= 1e-8);
        assert!(run.ghm_solves <= 60 * run.outer_iters);
    }
}
