//! One-dimensional searches over the border control `delta`: bracket and
//! bisect `h(delta)` into a target interval, hit a target step norm
//! (trust-region recovery), and hit a target dual value by safeguarded
//! Newton (gradient-regularization recovery). All of them ride on the fact
//! that `theta` and `h` are non-increasing in `delta` while the squared step
//! norm is non-decreasing.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ghm::{GhmContext, GhmSolution};
use crate::krylov::{cg_solve, lanczos_leftmost, NegatedOperator};

/// A `delta` interval with the h-values observed at its ends. Since `h` is
/// non-increasing, `h_high` (at `delta_low`) sits above `h_low` (at
/// `delta_high`).
#[derive(Debug, Clone)]
pub struct Bracket {
    pub delta_low: f64,
    pub delta_high: f64,
    /// h evaluated at `delta_high`.
    pub h_low: f64,
    /// h evaluated at `delta_low`.
    pub h_high: f64,
}

/// Acceptance window for `h`: accept any `h` in `[lo, hi + sigma]`.
#[derive(Debug, Clone, Copy)]
pub struct TargetInterval {
    pub lo: f64,
    pub hi: f64,
    pub sigma: f64,
}

impl TargetInterval {
    pub fn new(lo: f64, hi: f64, sigma: f64) -> Self {
        assert!(
            lo > 0.0 && lo <= hi && sigma > 0.0,
            "target interval needs 0 < lo <= hi and sigma > 0"
        );
        Self { lo, hi, sigma }
    }

    pub fn contains(&self, h: f64) -> bool {
        h >= self.lo && h <= self.hi + self.sigma
    }
}

/// Solves at `delta` and promotes a hard-case flag into the typed error so
/// search loops can bail out uniformly.
pub fn solve_strict(ctx: &GhmContext, delta: f64) -> Result<GhmSolution> {
    let sol = ctx.solve(delta)?;
    if sol.hard_case {
        let mut v = sol.v.clone();
        let norm = v.norm();
        if norm > 0.0 {
            v /= norm;
        }
        return Err(Error::HardCase {
            lambda1: sol.lambda1,
            eigvec: Box::new(v),
            t_abs: sol.t.abs(),
        });
    }
    Ok(sol)
}

/// Initial endpoints for the h-search given the eigen-extremes of the
/// Hessian: `delta_low = min(lambda1, -sqrt(hi))` and `delta_high =
/// max((1+|lambda1|)^2 (1+lambda_d+|lambda1|)/lo, ||phi||^2)`.
pub fn bracket_endpoints(
    target: TargetInterval,
    lambda1_h: f64,
    lambdad_h: f64,
    phi_norm: f64,
) -> (f64, f64) {
    let lo = lambda1_h.min(-target.hi.sqrt());
    let a1 = lambda1_h.abs();
    let hi = ((1.0 + a1).powi(2) * (1.0 + lambdad_h + a1) / target.lo).max(phi_norm * phi_norm);
    (lo, hi)
}

/// Builds a validated bracket for `h`: the analytic endpoints are evaluated
/// and, in the rare numerical cases where they fail to straddle the target,
/// grown geometrically outward.
pub fn bracket_for_h(
    ctx: &GhmContext,
    target: TargetInterval,
    lambda1_h: f64,
    lambdad_h: f64,
) -> Result<Bracket> {
    let (mut delta_low, mut delta_high) = bracket_endpoints(target, lambda1_h, lambdad_h, ctx.phi_norm());
    if delta_low >= delta_high {
        delta_low = delta_high - 1.0;
    }

    let mut h_high = solve_strict(ctx, delta_low)?.h;
    let mut grow = 1.0;
    let mut steps = 0usize;
    while h_high < target.hi && steps < 60 {
        delta_low -= grow * (1.0 + delta_low.abs());
        grow *= 2.0;
        h_high = solve_strict(ctx, delta_low)?.h;
        steps += 1;
    }
    if h_high < target.hi {
        return Err(Error::BisectionBudget { steps });
    }

    let mut h_low = solve_strict(ctx, delta_high)?.h;
    grow = 1.0;
    steps = 0;
    while h_low > target.lo && steps < 60 {
        delta_high += grow * (1.0 + delta_high.abs());
        grow *= 2.0;
        h_low = solve_strict(ctx, delta_high)?.h;
        steps += 1;
    }
    if h_low > target.lo {
        return Err(Error::BisectionBudget { steps });
    }

    Ok(Bracket {
        delta_low,
        delta_high,
        h_low,
        h_high,
    })
}

/// Bisects `delta` until `h` lands in the target window. Endpoints whose
/// recorded `h` already lies in the window are re-solved and accepted
/// directly (one solve).
pub fn bisect_h(
    ctx: &GhmContext,
    target: TargetInterval,
    bracket: &Bracket,
    max_steps: usize,
) -> Result<(f64, GhmSolution)> {
    assert!(
        bracket.delta_low < bracket.delta_high,
        "bracket must have positive width"
    );

    for (delta, h) in [
        (bracket.delta_low, bracket.h_high),
        (bracket.delta_high, bracket.h_low),
    ] {
        if target.contains(h) {
            let sol = solve_strict(ctx, delta)?;
            if target.contains(sol.h) {
                return Ok((delta, sol));
            }
        }
    }

    let mut lo = bracket.delta_low;
    let mut hi = bracket.delta_high;
    for _ in 0..max_steps {
        let width = hi - lo;
        if width <= 1e-15 * lo.abs().max(hi.abs()).max(1.0) {
            return Err(Error::DegenerateInterval { width });
        }
        let mid = 0.5 * (lo + hi);
        let sol = solve_strict(ctx, mid)?;
        if target.contains(sol.h) {
            return Ok((mid, sol));
        }
        if sol.h > target.hi + target.sigma {
            // Too much curvature control; move right.
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BisectionBudget { steps: max_steps })
}

/// What the trust-region recovery found.
#[derive(Debug, Clone)]
pub enum RadiusOutcome {
    /// Boundary solution: `||sol.d|| = radius` within tolerance and
    /// `sol.theta` is the multiplier.
    Boundary { delta: f64, sol: GhmSolution },
    /// The unconstrained Newton step already fits inside the ball.
    Interior {
        newton_step: DVector<f64>,
        cg_iters: usize,
    },
}

#[derive(Debug, Clone)]
pub struct RadiusSearch {
    pub outcome: RadiusOutcome,
    pub ghm_solves: usize,
    pub krylov_iters: usize,
}

/// Finds `delta` such that the model step has the requested norm, or detects
/// that the Newton step is interior to the ball.
pub fn bisect_for_radius(
    ctx: &GhmContext,
    radius: f64,
    tol: f64,
    max_steps: usize,
) -> Result<RadiusSearch> {
    assert!(radius > 0.0 && tol > 0.0);
    let solves_before = ctx.solves();
    let krylov_before = ctx.krylov_iters();
    let n = ctx.hess().dim();

    let left = lanczos_leftmost(ctx.hess(), ctx.eig_tol(), n, None, ctx.seed())?;
    let negated = NegatedOperator::new(ctx.hess());
    let right = lanczos_leftmost(&negated, ctx.eig_tol(), n, None, ctx.seed().wrapping_add(1))?;
    let lambda1 = left.value;
    let lambda_d = -right.value;
    let mut extra_krylov = left.iters + right.iters;

    let accept = |norm: f64| (norm - radius).abs() <= tol * radius.max(1.0);
    // Lazily computed unconstrained Newton step, reused across evaluations.
    let mut newton: Option<(DVector<f64>, usize)> = None;
    let mut newton_step = |extra: &mut usize| -> Result<(DVector<f64>, usize)> {
        if let Some(pair) = &newton {
            return Ok(pair.clone());
        }
        let res = cg_solve(ctx.hess(), &(-ctx.phi()), 1e-10, 20 * n.max(10))?;
        *extra += res.iters;
        let pair = (res.solution, res.iters);
        newton = Some(pair.clone());
        Ok(pair)
    };

    enum Eval {
        Norm(f64, GhmSolution),
        Past,
        /// Hard case at this delta: the boundary step would need an
        /// eigenvector component of unbounded length, so the probe counts as
        /// overshooting the radius.
        TooLong,
    }
    let lambda_scale = lambda1.abs().max(lambda_d.abs()).max(1.0);
    let steps = std::cell::Cell::new(0usize);
    let last_norm = std::cell::Cell::new(f64::NAN);
    let hard = std::cell::RefCell::new(None::<Error>);

    // Evaluation wrapper: classifies a delta as boundary-with-norm or
    // past-the-convex-threshold (theta = 0 side).
    let eval = |delta: f64| -> Result<Eval> {
        steps.set(steps.get() + 1);
        let sol = match solve_strict(ctx, delta) {
            Ok(sol) => sol,
            Err(err @ Error::HardCase { .. }) => {
                // Keep the first such error: early probes sit far from the
                // pinch, where the recovered eigenvector is most accurate.
                let mut slot = hard.borrow_mut();
                if slot.is_none() {
                    *slot = Some(err);
                }
                return Ok(Eval::TooLong);
            }
            Err(err) => return Err(err),
        };
        if sol.semidefinite() {
            return Ok(Eval::Past);
        }
        let norm = sol.big_delta.sqrt();
        last_norm.set(norm);
        if sol.theta <= 1e-11 * lambda_scale && norm < radius {
            return Ok(Eval::Past);
        }
        Ok(Eval::Norm(norm, sol))
    };

    let mut lo = if radius < 1.0 {
        let r2 = radius * radius;
        lambda1.min(lambda1 - ctx.phi_norm() * (1.0 - r2) / r2)
    } else {
        lambda1
    };
    let mut hi = lambda_d.max(lo + 1.0);

    // The step norm is non-decreasing in delta, so the left endpoint must
    // carry a step no longer than the radius; grow leftward until it does.
    let mut grow = 1.0;
    loop {
        match eval(lo)? {
            Eval::Norm(norm, sol) if accept(norm) => {
                return Ok(RadiusSearch {
                    outcome: RadiusOutcome::Boundary { delta: lo, sol },
                    ghm_solves: ctx.solves() - solves_before,
                    krylov_iters: ctx.krylov_iters() - krylov_before + extra_krylov,
                });
            }
            Eval::Norm(norm, _) if norm < radius => break,
            Eval::Past => {
                // Already past the convex threshold: interior if the Newton
                // step fits, otherwise the boundary root lies further left.
                let (step, cg_iters) = newton_step(&mut extra_krylov)?;
                if step.norm() <= radius {
                    return Ok(RadiusSearch {
                        outcome: RadiusOutcome::Interior {
                            newton_step: step,
                            cg_iters,
                        },
                        ghm_solves: ctx.solves() - solves_before,
                        krylov_iters: ctx.krylov_iters() - krylov_before + extra_krylov,
                    });
                }
                lo -= grow * (1.0 + lo.abs());
                grow *= 2.0;
            }
            _ => {
                lo -= grow * (1.0 + lo.abs());
                grow *= 2.0;
            }
        }
        if steps.get() > max_steps {
            return Err(Error::RadiusSearchStalled {
                steps: steps.get(),
                last_norm: last_norm.get(),
                radius,
            });
        }
    }

    // The right endpoint must carry a step at least as long as the radius,
    // or sit past the convex threshold with an oversized Newton step.
    grow = 1.0;
    loop {
        match eval(hi)? {
            Eval::Norm(norm, sol) if accept(norm) => {
                return Ok(RadiusSearch {
                    outcome: RadiusOutcome::Boundary { delta: hi, sol },
                    ghm_solves: ctx.solves() - solves_before,
                    krylov_iters: ctx.krylov_iters() - krylov_before + extra_krylov,
                });
            }
            Eval::Norm(norm, _) if norm > radius => break,
            Eval::TooLong => break,
            Eval::Past => {
                let (step, cg_iters) = newton_step(&mut extra_krylov)?;
                if step.norm() <= radius {
                    return Ok(RadiusSearch {
                        outcome: RadiusOutcome::Interior {
                            newton_step: step,
                            cg_iters,
                        },
                        ghm_solves: ctx.solves() - solves_before,
                        krylov_iters: ctx.krylov_iters() - krylov_before + extra_krylov,
                    });
                }
                break;
            }
            _ => {
                hi += grow * (1.0 + hi.abs());
                grow *= 2.0;
            }
        }
        if steps.get() > max_steps {
            return Err(Error::RadiusSearchStalled {
                steps: steps.get(),
                last_norm: last_norm.get(),
                radius,
            });
        }
    }

    // Bisect: the step norm is non-decreasing in delta.
    while steps.get() <= max_steps {
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
            // Bracket collapsed to floating-point resolution without hitting
            // the target window: the norm jumps across an unresolvable pinch.
            break;
        }
        let mid = 0.5 * (lo + hi);
        match eval(mid)? {
            Eval::Norm(norm, sol) => {
                if accept(norm) {
                    return Ok(RadiusSearch {
                        outcome: RadiusOutcome::Boundary { delta: mid, sol },
                        ghm_solves: ctx.solves() - solves_before,
                        krylov_iters: ctx.krylov_iters() - krylov_before + extra_krylov,
                    });
                }
                if norm > radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Eval::TooLong => hi = mid,
            Eval::Past => {
                let (step, cg_iters) = newton_step(&mut extra_krylov)?;
                if step.norm() <= radius {
                    return Ok(RadiusSearch {
                        outcome: RadiusOutcome::Interior {
                            newton_step: step,
                            cg_iters,
                        },
                        ghm_solves: ctx.solves() - solves_before,
                        krylov_iters: ctx.krylov_iters() - krylov_before + extra_krylov,
                    });
                }
                hi = mid;
            }
        }
    }
    if let Some(err) = hard.into_inner() {
        return Err(err);
    }
    Err(Error::RadiusSearchStalled {
        steps: steps.get(),
        last_norm: last_norm.get(),
        radius,
    })
}

/// Result of the dual-target Newton search.
#[derive(Debug, Clone)]
pub struct ThetaSearch {
    pub delta: f64,
    pub sol: GhmSolution,
    /// Newton/bisection update steps taken (not counting bracket setup).
    pub iters: usize,
    pub ghm_solves: usize,
    pub krylov_iters: usize,
}

/// Drives `theta(delta)` to `theta_target` by Newton steps on `delta` using
/// the closed-form derivative `-1/(Delta+1)`, safeguarded by a bisection
/// bracket. The left endpoint `-4 theta_target` never needs validation
/// because `theta(delta) >= -delta`; the right endpoint is grown until the
/// dual falls below the target.
pub fn newton_for_theta(
    ctx: &GhmContext,
    theta_target: f64,
    tol: f64,
    max_steps: usize,
) -> Result<ThetaSearch> {
    assert!(theta_target > 0.0 && tol > 0.0);
    let solves_before = ctx.solves();
    let krylov_before = ctx.krylov_iters();

    let mut lo = -4.0 * theta_target;
    let mut hi = ctx.phi_norm().powi(2).max(theta_target).max(1.0);
    let mut best: Option<(f64, GhmSolution)> = None;
    let record =
        |delta: f64, sol: &GhmSolution, best: &mut Option<(f64, GhmSolution)>| {
            let better = best
                .as_ref()
                .map(|(_, b)| (sol.theta - theta_target).abs() < (b.theta - theta_target).abs())
                .unwrap_or(true);
            if better {
                *best = Some((delta, sol.clone()));
            }
        };

    // Grow the right endpoint until theta(hi) <= target.
    let mut grow = 1.0;
    let mut setup = 0usize;
    loop {
        let sol = solve_strict(ctx, hi)?;
        record(hi, &sol, &mut best);
        if sol.theta <= theta_target {
            break;
        }
        hi += grow * (1.0 + hi.abs());
        grow *= 2.0;
        setup += 1;
        if setup > 60 {
            let (best_delta, best_sol) = best.expect("at least one evaluation");
            return Err(Error::ThetaSearchStalled {
                steps: setup,
                best_delta,
                best_theta: best_sol.theta,
                target: theta_target,
            });
        }
    }

    let mut delta = 0.5 * (lo + hi);
    for iter in 1..=max_steps {
        let sol = solve_strict(ctx, delta)?;
        record(delta, &sol, &mut best);
        let gap = sol.theta - theta_target;
        if gap.abs() <= tol {
            return Ok(ThetaSearch {
                delta,
                sol,
                iters: iter,
                ghm_solves: ctx.solves() - solves_before,
                krylov_iters: ctx.krylov_iters() - krylov_before,
            });
        }
        if gap > 0.0 {
            lo = delta;
        } else {
            hi = delta;
        }
        // Newton step on the dual; fall back to the midpoint whenever the
        // iterate would escape the bracket.
        let next = delta + gap * (sol.big_delta + 1.0);
        delta = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }

    let (best_delta, best_sol) = best.expect("at least one evaluation");
    Err(Error::ThetaSearchStalled {
        steps: max_steps,
        best_delta,
        best_theta: best_sol.theta,
        target: theta_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghm::GhmContext;
    use crate::krylov::{DenseOperator, SymmetricOperator};
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_ctx(entries: &[f64], phi: DVector<f64>) -> (DenseOperator, DVector<f64>) {
        let op = DenseOperator::new(DMatrix::from_diagonal(&DVector::from_row_slice(entries)));
        (op, phi)
    }

    #[test]
    fn bracket_endpoint_formula_examples() {
        let t = TargetInterval::new(1.0, 4.0, 1e-6);
        let (lo, hi) = bracket_endpoints(t, -1.0, 2.0, 1.0);
        assert_relative_eq!(lo, -2.0, epsilon = 1e-15);
        assert_relative_eq!(hi, 16.0, epsilon = 1e-15);

        let t2 = TargetInterval::new(1.0, 1.0, 1e-6);
        let (lo2, hi2) = bracket_endpoints(t2, 0.0, 1.0, 2.0);
        assert_relative_eq!(lo2, -1.0, epsilon = 1e-15);
        assert_relative_eq!(hi2, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn bracket_straddles_target_on_indefinite_example() {
        let (op, phi) = diag_ctx(&[-1.0, 2.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-11, 1);
        let target = TargetInterval::new(0.5, 2.0, 1e-6);
        let bracket = bracket_for_h(&ctx, target, -1.0, 2.0).unwrap();
        assert!(bracket.h_high >= 2.0, "h at delta_low = {}", bracket.h_high);
        assert!(bracket.h_low <= 0.5, "h at delta_high = {}", bracket.h_low);
        assert!(bracket.delta_low < bracket.delta_high);
    }

    #[test]
    fn bisection_recovers_golden_ratio_delta() {
        let (op, phi) = diag_ctx(&[-1.0, 2.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 2);
        let target = TargetInterval::new(1.0, 1.0, 1e-6);
        let bracket = bracket_for_h(&ctx, target, -1.0, 2.0).unwrap();
        let (delta, sol) = bisect_h(&ctx, target, &bracket, 200).unwrap();
        // h(0) = 1 on this fixture, so the recovered delta sits near zero.
        assert!(delta.abs() < 1e-3, "delta = {delta}");
        assert!(target.contains(sol.h), "h = {}", sol.h);
    }

    #[test]
    fn midpoint_hit_costs_one_solve() {
        let (op, phi) = diag_ctx(&[-1.0, 2.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 3);
        let h_at = |d: f64| ctx.solve(d).unwrap().h;
        let bracket = Bracket {
            delta_low: -0.5,
            delta_high: 0.5,
            h_high: h_at(-0.5),
            h_low: h_at(0.5),
        };
        let target = TargetInterval::new(0.9, 1.1, 1e-6);
        assert!(!target.contains(bracket.h_high) && !target.contains(bracket.h_low));
        let before = ctx.solves();
        let (delta, sol) = bisect_h(&ctx, target, &bracket, 50).unwrap();
        assert_eq!(ctx.solves() - before, 1, "first midpoint is accepted");
        assert_relative_eq!(delta, 0.0, epsilon = 1e-15);
        assert!(target.contains(sol.h));
    }

    #[test]
    fn convex_quarter_target() {
        let (op, phi) = diag_ctx(&[1.0, 1.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 4);
        let target = TargetInterval::new(0.25, 0.25, 1e-6);
        let bracket = bracket_for_h(&ctx, target, 1.0, 1.0).unwrap();
        let (_, sol) = bisect_h(&ctx, target, &bracket, 200).unwrap();
        assert!(sol.h >= 0.25 && sol.h <= 0.25 + 1e-6, "h = {}", sol.h);
    }

    #[test]
    fn hard_case_surfaces_as_typed_error() {
        let (op, phi) = diag_ctx(&[2.0, -1.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-11, 5);
        let target = TargetInterval::new(0.5, 1.0, 1e-6);
        match bracket_for_h(&ctx, target, -1.0, 2.0) {
            Err(Error::HardCase { lambda1, eigvec, t_abs }) => {
                assert_relative_eq!(lambda1, -1.0, epsilon = 1e-8);
                assert!(t_abs <= 1e-6);
                assert_relative_eq!(eigvec.norm(), 1.0, epsilon = 1e-9);
            }
            other => panic!("expected hard case, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_bracket_is_rejected() {
        let (op, phi) = diag_ctx(&[-1.0, 2.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 6);
        let bracket = Bracket {
            delta_low: 0.0,
            delta_high: 1e-16,
            h_high: 10.0,
            h_low: 5.0,
        };
        let target = TargetInterval::new(0.001, 0.002, 1e-9);
        assert!(matches!(
            bisect_h(&ctx, target, &bracket, 50),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn bisection_budget_is_enforced() {
        let (op, phi) = diag_ctx(&[-1.0, 2.0], dvector![1.0, 0.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 7);
        let bracket = Bracket {
            delta_low: -50.0,
            delta_high: 50.0,
            h_high: 1e6,
            h_low: 1e-9,
        };
        let target = TargetInterval::new(1.0, 1.0, 1e-12);
        assert!(matches!(
            bisect_h(&ctx, target, &bracket, 1),
            Err(Error::BisectionBudget { steps: 1 })
        ));
    }

    #[test]
    fn trust_region_identity_closed_form() {
        let (op, phi) = diag_ctx(&[1.0, 1.0], dvector![3.0, 4.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 8);
        let search = bisect_for_radius(&ctx, 1.0, 1e-8, 200).unwrap();
        match search.outcome {
            RadiusOutcome::Boundary { sol, .. } => {
                let d = sol.d.as_ref().unwrap();
                assert_relative_eq!(d[0], -0.6, epsilon = 1e-6);
                assert_relative_eq!(d[1], -0.8, epsilon = 1e-6);
                assert_relative_eq!(sol.theta, 4.0, epsilon = 1e-6);
            }
            other => panic!("expected boundary, got {other:?}"),
        }
        assert!(search.ghm_solves > 0 && search.krylov_iters > 0);
    }

    #[test]
    fn trust_region_boundary_satisfies_kkt() {
        let (op, phi) = diag_ctx(&[1.0, 2.0], dvector![1.0, 1.0]);
        let ctx = GhmContext::new(&op, phi.clone(), 1e-12, 9);
        let radius = 0.5;
        let search = bisect_for_radius(&ctx, radius, 1e-8, 200).unwrap();
        match search.outcome {
            RadiusOutcome::Boundary { sol, .. } => {
                let d = sol.d.as_ref().unwrap();
                assert!((d.norm() - radius).abs() <= 1e-8 * radius.max(1.0));
                let grad = op.apply(d) + sol.theta * d + &phi;
                assert!(grad.norm() <= 1e-6, "KKT residual {}", grad.norm());
                assert!(sol.theta >= -1e-9);
            }
            other => panic!("expected boundary, got {other:?}"),
        }
    }

    #[test]
    fn trust_region_detects_interior_solution() {
        let (op, phi) = diag_ctx(&[1.0, 2.0], dvector![1.0, 1.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 10);
        let search = bisect_for_radius(&ctx, 10.0, 1e-8, 200).unwrap();
        match search.outcome {
            RadiusOutcome::Interior { newton_step, cg_iters } => {
                assert_relative_eq!(newton_step.norm(), 1.25f64.sqrt(), epsilon = 1e-8);
                assert_relative_eq!(newton_step[0], -1.0, epsilon = 1e-9);
                assert_relative_eq!(newton_step[1], -0.5, epsilon = 1e-9);
                assert!(cg_iters >= 1);
            }
            other => panic!("expected interior, got {other:?}"),
        }
    }

    #[test]
    fn dual_target_identity_closed_form() {
        let (op, phi) = diag_ctx(&[1.0, 1.0], dvector![3.0, 4.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 11);
        let target = 5.0f64.sqrt();
        let search = newton_for_theta(&ctx, target, 1e-9, 100).unwrap();
        assert!((search.sol.theta - target).abs() <= 1e-9);
        let d = search.sol.d.as_ref().unwrap();
        let scale = 1.0 + 5.0f64.sqrt();
        assert_relative_eq!(d[0], -3.0 / scale, epsilon = 1e-7);
        assert_relative_eq!(d[1], -4.0 / scale, epsilon = 1e-7);
    }

    #[test]
    fn dual_target_diagonal_closed_form() {
        let (op, phi) = diag_ctx(&[1.0, 2.0], dvector![1.0, 1.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 12);
        let search = newton_for_theta(&ctx, 1.0, 1e-9, 100).unwrap();
        let d = search.sol.d.as_ref().unwrap();
        assert_relative_eq!(d[0], -0.5, epsilon = 1e-7);
        assert_relative_eq!(d[1], -1.0 / 3.0, epsilon = 1e-7);
    }

    #[test]
    fn newton_matches_pure_bisection_and_stays_cheap() {
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let n = 6;
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let spd = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
            let op = DenseOperator::new(spd);
            let phi = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));

            let ctx = GhmContext::new(&op, phi.clone(), 1e-12, seed);
            let search = newton_for_theta(&ctx, 0.3, 1e-10, 60).unwrap();
            assert!(search.iters <= 8, "seed {seed}: {} iters", search.iters);

            // Pure bisection oracle on the same dual curve.
            let oracle = GhmContext::new(&op, phi, 1e-12, seed);
            let (mut lo, mut hi) = (-4.0 * 0.3, 50.0);
            let mut delta = 0.0;
            for _ in 0..200 {
                delta = 0.5 * (lo + hi);
                let sol = oracle.solve(delta).unwrap();
                let gap = sol.theta - 0.3;
                if gap.abs() <= 1e-12 {
                    break;
                }
                if gap > 0.0 {
                    lo = delta;
                } else {
                    hi = delta;
                }
            }
            assert!(
                (search.delta - delta).abs() <= 1e-8 * delta.abs().max(1.0),
                "seed {seed}: {} vs {}",
                search.delta,
                delta
            );
        }
    }

    #[test]
    fn unreachable_dual_target_degenerates_into_hard_case() {
        // Indefinite Hessian: theta is bounded below by 1, so 0.5 can never
        // be reached; pushing delta rightward drives t to zero first.
        let (op, phi) = diag_ctx(&[-1.0, 2.0], dvector![0.0, 1.0]);
        let ctx = GhmContext::new(&op, phi, 1e-10, 13);
        match newton_for_theta(&ctx, 0.5, 1e-10, 40) {
            Err(Error::HardCase { lambda1, .. }) => {
                assert!(lambda1 <= -1.0 + 1e-6);
            }
            other => panic!("expected hard case, got {other:?}"),
        }
    }

    #[test]
    fn exhausted_newton_budget_reports_best_iterate() {
        let (op, phi) = diag_ctx(&[1.0, 1.0], dvector![3.0, 4.0]);
        let ctx = GhmContext::new(&op, phi, 1e-12, 14);
        // Tolerance below what the eigensolver can certify: the search runs
        // out of steps and hands back its closest dual value.
        match newton_for_theta(&ctx, 5.0f64.sqrt(), 1e-18, 3) {
            Err(Error::ThetaSearchStalled { steps, best_theta, target, .. }) => {
                assert_eq!(steps, 3);
                assert!(best_theta.is_finite() && best_theta >= 0.0);
                assert_relative_eq!(target, 5.0f64.sqrt(), epsilon = 1e-15);
            }
            other => panic!("expected stall, got {other:?}"),
        }
    }
}
