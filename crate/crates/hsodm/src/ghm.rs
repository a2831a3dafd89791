//! The homogeneous model: minimize `[v;t]' F [v;t]` over the unit ball with
//! `F = [[H, phi],[phi', delta]]`, together with the auxiliary quantities
//! used by the one-dimensional searches over `delta`.

use std::cell::{Cell, RefCell};

use nalgebra::DVector;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krylov::{lanczos_leftmost, materialize, NegatedOperator, SymmetricOperator};

/// Borrowed description of one bordered eigenproblem.
#[derive(Clone, Copy)]
pub struct GhmSpec<'a> {
    pub hess: &'a dyn SymmetricOperator,
    pub phi: &'a DVector<f64>,
    pub delta: f64,
}

impl<'a> GhmSpec<'a> {
    pub fn dim(&self) -> usize {
        self.hess.dim()
    }
}

/// The bordered operator `[v;t] -> [H v + t phi; phi'v + delta t]`.
/// Costs exactly one Hessian matvec per application.
pub struct GhmOperator<'a> {
    hess: &'a dyn SymmetricOperator,
    phi: &'a DVector<f64>,
    delta: f64,
    phi_norm: f64,
    count: Cell<usize>,
}

/// Assembles the bordered operator for a spec.
pub fn build_ghm<'a>(spec: GhmSpec<'a>) -> GhmOperator<'a> {
    assert_eq!(
        spec.hess.dim(),
        spec.phi.len(),
        "phi length must match the Hessian dimension"
    );
    GhmOperator {
        hess: spec.hess,
        phi: spec.phi,
        delta: spec.delta,
        phi_norm: spec.phi.norm(),
        count: Cell::new(0),
    }
}

impl SymmetricOperator for GhmOperator<'_> {
    fn dim(&self) -> usize {
        self.hess.dim() + 1
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        let n = self.hess.dim();
        let v = x.rows(0, n).into_owned();
        let t = x[n];
        let mut top = self.hess.apply(&v);
        top.axpy(t, self.phi, 1.0);
        let bottom = self.phi.dot(&v) + self.delta * t;
        let mut y = DVector::zeros(n + 1);
        y.rows_mut(0, n).copy_from(&top);
        y[n] = bottom;
        y
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        self.hess
            .norm_hint()
            .map(|h| h + self.phi_norm + self.delta.abs())
    }
}

/// Primal-dual solution of one bordered eigenproblem.
///
/// `d = v/t` exists when the boundary solution has `|t|` above the hard-case
/// threshold; `Delta = ||d||^2` (or the cap in the hard case), `omega =
/// theta^2`, and `h = omega / Delta`.
#[derive(Debug, Clone)]
pub struct GhmSolution {
    pub lambda1: f64,
    pub v: DVector<f64>,
    pub t: f64,
    pub theta: f64,
    pub d: Option<DVector<f64>>,
    pub big_delta: f64,
    pub omega: f64,
    pub h: f64,
    pub hard_case: bool,
    pub eig_iters: usize,
}

impl GhmSolution {
    /// True when the bordered matrix tested positive semidefinite and the
    /// model is solved by the zero step.
    pub fn semidefinite(&self) -> bool {
        self.theta == 0.0
    }
}

/// Solves the bordered eigenproblem for the leftmost eigenpair and extracts
/// the step.
///
/// `eig_tol` is both the eigensolver residual tolerance and the
/// semidefiniteness threshold: `lambda1 >= -eig_tol` yields the zero-step
/// solution with `theta = 0`. Otherwise `theta = -lambda1 > 0` and the
/// solution is the boundary eigenvector, flagged as a hard case when
/// `|t| <= t_threshold` (then `Delta` is reported as `delta_cap` and the
/// step is absent).
pub fn solve_ghm(
    spec: GhmSpec,
    eig_tol: f64,
    warm: Option<&DVector<f64>>,
    seed: u64,
    t_threshold: f64,
    delta_cap: f64,
) -> Result<GhmSolution> {
    assert!(t_threshold > 0.0 && delta_cap > 0.0);
    let n = spec.dim();
    let op = build_ghm(spec);
    // Warm starts are blended with a small deterministic perturbation:
    // a previous eigenvector can span an invariant subspace that excludes
    // the new leftmost direction (typically in the hard case), and full
    // reorthogonalization would then lock the iteration inside it.
    let start = warm.map(|w| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
        let mut u = DVector::from_fn(n + 1, |_, _| rng.gen_range(-1.0..1.0));
        let norm = u.norm();
        if norm > 0.0 {
            u /= norm;
        }
        let mut s = w.clone();
        s.axpy(1e-8 * w.norm().max(1.0), &u, 1.0);
        s
    });
    let mut res = lanczos_leftmost(&op, eig_tol, n + 1, start.as_ref(), seed)?;
    let mut eig_iters = res.iters;
    // The border axis pins the spectrum: lambda1(F) <= e_{n+1}' F e_{n+1} =
    // delta. A Ritz value above that line converged inside an invariant
    // subspace that misses the leftmost direction, which warm starts produce
    // whenever the previous eigenvector stays exactly invariant for the new
    // matrix (for instance a Hessian null direction orthogonal to phi).
    // Rerun once from a fresh random start and keep the lower Ritz value.
    let slack = 2.0 * res.residual + 1e-12 * (1.0 + spec.delta.abs());
    if res.value > spec.delta + slack {
        let fresh = lanczos_leftmost(&op, eig_tol, n + 1, None, seed ^ 0xA5A5_A5A5)?;
        eig_iters += fresh.iters;
        if fresh.value < res.value {
            res = fresh;
        }
    }

    let mut v = res.vector.rows(0, n).into_owned();
    let mut t = res.vector[n];
    if t < 0.0 {
        v.neg_mut();
        t = -t;
    }
    let lambda1 = res.value;

    if lambda1 >= -eig_tol {
        return Ok(GhmSolution {
            lambda1,
            v,
            t,
            theta: 0.0,
            d: None,
            big_delta: 0.0,
            omega: 0.0,
            h: 0.0,
            hard_case: false,
            eig_iters,
        });
    }

    let theta = -lambda1;
    let omega = theta * theta;
    if t.abs() <= t_threshold {
        return Ok(GhmSolution {
            lambda1,
            v,
            t,
            theta,
            d: None,
            big_delta: delta_cap,
            omega,
            h: omega / delta_cap,
            hard_case: true,
            eig_iters,
        });
    }

    let d = &v / t;
    let big_delta = d.norm_squared();
    let h = if big_delta > 0.0 {
        omega / big_delta
    } else {
        f64::INFINITY
    };
    Ok(GhmSolution {
        lambda1,
        v,
        t,
        theta,
        d: Some(d),
        big_delta,
        omega,
        h,
        hard_case: false,
        eig_iters,
    })
}

/// First-order residuals of the two stationarity equations:
/// `r1 = ||(H + theta I) v + t phi||` and `r2 = |phi'v + t (delta + theta)|`.
/// Semidefinite solutions return `(0, 0)` since the step is the zero vector.
pub fn check_optimality(spec: GhmSpec, sol: &GhmSolution) -> (f64, f64) {
    if sol.semidefinite() {
        return (0.0, 0.0);
    }
    let mut top = spec.hess.apply(&sol.v);
    top.axpy(sol.theta, &sol.v, 1.0);
    top.axpy(sol.t, spec.phi, 1.0);
    let r1 = top.norm();
    let r2 = (spec.phi.dot(&sol.v) + sol.t * (spec.delta + sol.theta)).abs();
    (r1, r2)
}

/// Upper bound on the dual variable: `max{-delta, -lambda1(H), 0} + ||phi||`.
pub fn theta_upper_bound(spec: GhmSpec, lambda1_h: f64) -> f64 {
    (-spec.delta).max(-lambda1_h).max(0.0) + spec.phi.norm()
}

/// Spectral quantities used to recognize and explain the hard case.
#[derive(Debug, Clone)]
pub struct HardCaseDiagnostics {
    pub lambda1_h: f64,
    pub lambdad_h: f64,
    /// `|u1' phi|` where `u1` is the computed leftmost eigenvector of `H`.
    pub projection_norm: f64,
    /// `lambda1(H) + phi' (H - lambda1 I)^+ phi`, dense mode only.
    pub alpha_tilde1: Option<f64>,
    /// `phi' H^{-1} phi`, dense mode only and only when `H` is positive
    /// definite; the largest `delta` for which the model stays convex.
    pub delta_bar_convex: Option<f64>,
}

/// Computes eigen-extremes of `H` and the hard-case indicators. Dense mode
/// additionally materializes `H` (intended for n up to a few hundred) to get
/// the pseudo-inverse quantities.
pub fn diagnostics(
    spec: GhmSpec,
    dense_mode: bool,
    eig_tol: f64,
    seed: u64,
) -> Result<HardCaseDiagnostics> {
    let n = spec.dim();
    let left = lanczos_leftmost(spec.hess, eig_tol, n, None, seed)?;
    let negated = NegatedOperator::new(spec.hess);
    let right = lanczos_leftmost(&negated, eig_tol, n, None, seed.wrapping_add(1))?;
    let lambda1_h = left.value;
    let lambdad_h = -right.value;
    let projection_norm = left.vector.dot(spec.phi).abs();

    let (alpha_tilde1, delta_bar_convex) = if dense_mode {
        let dense = materialize(spec.hess);
        let eig = dense.clone().symmetric_eigen();
        let scale = eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()))
            .max(1.0);
        let cluster = 1e-10 * scale;
        let lam_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut alpha = lam_min;
        for i in 0..n {
            let gap = eig.eigenvalues[i] - lam_min;
            if gap > cluster {
                let coeff = eig.eigenvectors.column(i).dot(spec.phi);
                alpha += coeff * coeff / gap;
            }
        }
        let convex = if lam_min > cluster {
            dense
                .lu()
                .solve(spec.phi)
                .map(|hinv_phi| spec.phi.dot(&hinv_phi))
        } else {
            None
        };
        (Some(alpha), convex)
    } else {
        (None, None)
    };

    Ok(HardCaseDiagnostics {
        lambda1_h,
        lambdad_h,
        projection_norm,
        alpha_tilde1,
        delta_bar_convex,
    })
}

/// Shared state for repeated solves against the same Hessian and `phi`:
/// warm-started eigenvectors plus solve and Krylov-iteration telemetry.
pub struct GhmContext<'a> {
    hess: &'a dyn SymmetricOperator,
    phi: DVector<f64>,
    phi_norm: f64,
    eig_tol: f64,
    seed: u64,
    t_threshold: f64,
    delta_cap: f64,
    solves: Cell<usize>,
    krylov_iters: Cell<usize>,
    warm: RefCell<Option<DVector<f64>>>,
}

impl<'a> GhmContext<'a> {
    pub fn new(hess: &'a dyn SymmetricOperator, phi: DVector<f64>, eig_tol: f64, seed: u64) -> Self {
        assert_eq!(hess.dim(), phi.len());
        let phi_norm = phi.norm();
        Self {
            hess,
            phi,
            phi_norm,
            eig_tol,
            seed,
            t_threshold: 1e-6,
            delta_cap: 1e8,
            solves: Cell::new(0),
            krylov_iters: Cell::new(0),
            warm: RefCell::new(None),
        }
    }

    pub fn with_thresholds(mut self, t_threshold: f64, delta_cap: f64) -> Self {
        assert!(t_threshold > 0.0 && delta_cap > 0.0);
        self.t_threshold = t_threshold;
        self.delta_cap = delta_cap;
        self
    }

    pub fn hess(&self) -> &'a dyn SymmetricOperator {
        self.hess
    }

    pub fn phi(&self) -> &DVector<f64> {
        &self.phi
    }

    pub fn phi_norm(&self) -> f64 {
        self.phi_norm
    }

    pub fn eig_tol(&self) -> f64 {
        self.eig_tol
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Replaces `phi` (hard-case perturbations); the warm start is kept since
    /// the operator changes only in the border.
    pub fn set_phi(&mut self, phi: DVector<f64>) {
        assert_eq!(self.hess.dim(), phi.len());
        self.phi_norm = phi.norm();
        self.phi = phi;
    }

    pub fn clear_warm_start(&self) {
        *self.warm.borrow_mut() = None;
    }

    /// Solves the model at the given `delta`, recording telemetry and
    /// updating the warm start on success.
    pub fn solve(&self, delta: f64) -> Result<GhmSolution> {
        self.solves.set(self.solves.get() + 1);
        let spec = GhmSpec {
            hess: self.hess,
            phi: &self.phi,
            delta,
        };
        let warm = self.warm.borrow().clone();
        let out = solve_ghm(
            spec,
            self.eig_tol,
            warm.as_ref(),
            self.seed,
            self.t_threshold,
            self.delta_cap,
        );
        match &out {
            Ok(sol) => {
                self.krylov_iters.set(self.krylov_iters.get() + sol.eig_iters);
                let n = self.hess.dim();
                let mut y = DVector::zeros(n + 1);
                y.rows_mut(0, n).copy_from(&sol.v);
                y[n] = sol.t;
                *self.warm.borrow_mut() = Some(y);
            }
            Err(Error::EigenNonConvergence { best }) => {
                self.krylov_iters.set(self.krylov_iters.get() + best.iters);
            }
            Err(_) => {}
        }
        out
    }

    pub fn solves(&self) -> usize {
        self.solves.get()
    }

    pub fn krylov_iters(&self) -> usize {
        self.krylov_iters.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::DenseOperator;
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_op(entries: &[f64]) -> DenseOperator {
        DenseOperator::new(DMatrix::from_diagonal(&DVector::from_row_slice(entries)))
    }

    #[test]
    fn bordered_apply_matches_block_formula() {
        let hess = diag_op(&[1.0, 1.0]);
        let phi = dvector![0.0, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: -1.0,
        };
        let op = build_ghm(spec);
        let y = op.apply(&dvector![0.0, 0.0, 1.0]);
        assert_eq!(y, dvector![0.0, 0.0, -1.0]);

        let hess2 = diag_op(&[-1.0, 2.0]);
        let phi2 = dvector![1.0, 0.0];
        let op2 = build_ghm(GhmSpec {
            hess: &hess2,
            phi: &phi2,
            delta: 0.0,
        });
        let y2 = op2.apply(&dvector![1.0, 0.0, 0.0]);
        assert_eq!(y2, dvector![-1.0, 0.0, 1.0]);
        assert_eq!(hess2.matvec_count(), 1, "one Hessian matvec per apply");
    }

    #[test]
    fn dense_assembly_has_bordered_layout() {
        let hess = diag_op(&[2.0, -1.0]);
        let phi = dvector![1.0, 0.0];
        let op = build_ghm(GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: 0.0,
        });
        let dense = materialize(&op);
        let expected =
            DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_relative_eq!((dense - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn golden_ratio_fixture() {
        let hess = diag_op(&[-1.0, 2.0]);
        let phi = dvector![1.0, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: 0.0,
        };
        let sol = solve_ghm(spec, 1e-12, None, 7, 1e-6, 1e8).unwrap();
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!(!sol.hard_case);
        assert_relative_eq!(sol.theta, golden, epsilon = 1e-8);
        assert_relative_eq!(sol.t, 0.5257, epsilon = 1e-4);
        let d = sol.d.as_ref().unwrap();
        assert_relative_eq!(d[0], -golden, epsilon = 1e-7);
        assert_relative_eq!(d[1], 0.0, epsilon = 1e-7);
        assert_relative_eq!(sol.big_delta, golden + 1.0, epsilon = 1e-6);
        assert_relative_eq!(sol.h, 1.0, epsilon = 1e-6);
        assert_relative_eq!(sol.omega, sol.theta * sol.theta, epsilon = 1e-12);

        let (r1, r2) = check_optimality(spec, &sol);
        assert!(r1 <= 1e-8, "r1 = {r1}");
        assert!(r2 <= 1e-8, "r2 = {r2}");
    }

    #[test]
    fn decoupled_border_gives_zero_step_with_positive_theta() {
        let hess = diag_op(&[1.0, 1.0]);
        let phi = dvector![0.0, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: -1.0,
        };
        let sol = solve_ghm(spec, 1e-10, None, 3, 1e-6, 1e8).unwrap();
        assert_relative_eq!(sol.lambda1, -1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.theta, 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.t, 1.0, epsilon = 1e-9);
        assert!(!sol.hard_case, "t = 1 is far from the hard-case threshold");
        let d = sol.d.as_ref().unwrap();
        assert!(d.norm() <= 1e-8);
        assert!(sol.big_delta <= 1e-12);
        // The step is numerically zero, so h blows up (infinite when the
        // eigensolver returns an exact zero block).
        assert!(sol.h > 1e10, "h = {} should be effectively infinite", sol.h);
    }

    #[test]
    fn hard_case_is_flagged_with_capped_delta() {
        let hess = diag_op(&[2.0, -1.0]);
        let phi = dvector![1.0, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: 0.0,
        };
        let sol = solve_ghm(spec, 1e-11, None, 5, 1e-6, 1e8).unwrap();
        assert!(sol.hard_case);
        assert_relative_eq!(sol.theta, 1.0, epsilon = 1e-9);
        assert!(sol.t.abs() <= 1e-6);
        assert!(sol.d.is_none());
        assert_relative_eq!(sol.big_delta, 1e8, epsilon = 0.0);
        assert_relative_eq!(sol.h, 1e-8, epsilon = 1e-14);
        let (r1, _r2) = check_optimality(spec, &sol);
        assert!(r1 <= 1e-8, "r1 = {r1}");
    }

    #[test]
    fn semidefinite_branch_returns_zero_residuals() {
        let hess = diag_op(&[1.0, 1.0]);
        let phi = dvector![0.1, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: 1.0,
        };
        let sol = solve_ghm(spec, 1e-10, None, 11, 1e-6, 1e8).unwrap();
        assert!(sol.semidefinite());
        assert_eq!(sol.theta, 0.0);
        assert!(sol.d.is_none());
        assert!(!sol.hard_case);
        assert_eq!(sol.big_delta, 0.0);
        assert_eq!(sol.omega, 0.0);
        assert_eq!(sol.h, 0.0);
        assert_eq!(check_optimality(spec, &sol), (0.0, 0.0));
    }

    #[test]
    fn theta_never_exceeds_its_upper_bound() {
        let hess = diag_op(&[-1.0, 2.0]);
        let phi = dvector![1.0, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: 0.0,
        };
        assert_relative_eq!(theta_upper_bound(spec, -1.0), 2.0, epsilon = 1e-15);
        let sol = solve_ghm(spec, 1e-10, None, 1, 1e-6, 1e8).unwrap();
        assert!(sol.theta <= 2.0 + 1e-9);

        let ident = diag_op(&[1.0, 1.0]);
        let spec2 = GhmSpec {
            hess: &ident,
            phi: &phi,
            delta: 0.0,
        };
        assert_relative_eq!(theta_upper_bound(spec2, 1.0), 1.0, epsilon = 1e-15);
        let spec3 = GhmSpec {
            hess: &ident,
            phi: &phi,
            delta: -3.0,
        };
        assert_relative_eq!(theta_upper_bound(spec3, 1.0), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_is_nonincreasing_and_convex_in_delta() {
        let hess = diag_op(&[-1.0, 2.0]);
        let phi = dvector![1.0, 0.0];
        let mut thetas = Vec::new();
        for i in 0..21 {
            let delta = -2.0 + 4.0 * i as f64 / 20.0;
            let spec = GhmSpec {
                hess: &hess,
                phi: &phi,
                delta,
            };
            let sol = solve_ghm(spec, 1e-12, None, 2, 1e-6, 1e8).unwrap();
            thetas.push(sol.theta);
        }
        let scale = thetas.iter().fold(1.0f64, |a, &t| a.max(t.abs()));
        for w in thetas.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * scale, "theta increased: {w:?}");
        }
        for w in thetas.windows(3) {
            let second = w[2] - 2.0 * w[1] + w[0];
            assert!(second >= -1e-6 * scale, "convexity violated: {second}");
        }
    }

    #[test]
    fn theta_derivative_matches_closed_form() {
        let hess = diag_op(&[-1.0, 2.0]);
        let phi = dvector![1.0, 0.0];
        let eps = 1e-5;
        let solve_at = |delta: f64| {
            let spec = GhmSpec {
                hess: &hess,
                phi: &phi,
                delta,
            };
            solve_ghm(spec, 1e-13, None, 4, 1e-6, 1e8).unwrap()
        };
        let mid = solve_at(0.0);
        let fd = (solve_at(eps).theta - solve_at(-eps).theta) / (2.0 * eps);
        let closed = -1.0 / (mid.big_delta + 1.0);
        assert_relative_eq!(fd, closed, max_relative = 1e-4);
    }

    #[test]
    fn h_is_nonincreasing_in_delta() {
        let hess = diag_op(&[-1.0, 2.0]);
        let phi = dvector![1.0, 0.0];
        let mut hs = Vec::new();
        for i in 0..21 {
            let delta = -2.0 + 3.0 * i as f64 / 20.0;
            let spec = GhmSpec {
                hess: &hess,
                phi: &phi,
                delta,
            };
            let sol = solve_ghm(spec, 1e-12, None, 6, 1e-6, 1e8).unwrap();
            assert!(!sol.hard_case);
            hs.push(sol.h);
        }
        for w in hs.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-7) + 1e-10, "h increased: {w:?}");
        }
    }

    #[test]
    fn diagnostics_pinned_examples() {
        // Leftmost eigenvector orthogonal to phi: the classic hard case.
        let hess = diag_op(&[2.0, -1.0]);
        let phi = dvector![1.0, 0.0];
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: 0.0,
        };
        let diag = diagnostics(spec, true, 1e-12, 3).unwrap();
        assert_relative_eq!(diag.lambda1_h, -1.0, epsilon = 1e-10);
        assert_relative_eq!(diag.lambdad_h, 2.0, epsilon = 1e-10);
        assert!(diag.projection_norm <= 1e-9);
        assert_relative_eq!(diag.alpha_tilde1.unwrap(), -2.0 / 3.0, epsilon = 1e-9);
        assert!(diag.delta_bar_convex.is_none(), "H is indefinite");

        // phi aligned with the leftmost eigenvector.
        let hess2 = diag_op(&[-1.0, 2.0]);
        let diag2 = diagnostics(
            GhmSpec {
                hess: &hess2,
                phi: &phi,
                delta: 0.0,
            },
            false,
            1e-12,
            3,
        )
        .unwrap();
        assert_relative_eq!(diag2.projection_norm, 1.0, epsilon = 1e-9);
        assert!(diag2.alpha_tilde1.is_none());

        // Identity Hessian: the convex threshold is phi' H^{-1} phi.
        let ident = diag_op(&[1.0, 1.0]);
        let ones = dvector![1.0, 1.0];
        let diag3 = diagnostics(
            GhmSpec {
                hess: &ident,
                phi: &ones,
                delta: 0.0,
            },
            true,
            1e-12,
            3,
        )
        .unwrap();
        assert_relative_eq!(diag3.lambda1_h, 1.0, epsilon = 1e-10);
        assert_relative_eq!(diag3.lambdad_h, 1.0, epsilon = 1e-10);
        assert_relative_eq!(diag3.delta_bar_convex.unwrap(), 2.0, epsilon = 1e-9);
        assert!(diag3.alpha_tilde1.unwrap() >= diag3.lambda1_h - 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn negative_lambda1_when_delta_nonpositive_and_phi_nonzero(
            seed in 0u64..10_000,
            n in 2usize..6,
            delta in -3.0f64..0.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let hess = DenseOperator::new((&a + a.transpose()) * 0.5);
            let mut phi = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
            if phi.norm() < 1e-3 {
                phi[0] += 1.0;
            }
            let spec = GhmSpec { hess: &hess, phi: &phi, delta };
            let sol = solve_ghm(spec, 1e-10, None, seed, 1e-6, 1e8).unwrap();
            prop_assert!(sol.lambda1 < 0.0, "lambda1 = {}", sol.lambda1);
            // Unit norm of the combined eigenvector.
            let norm = (sol.v.norm_squared() + sol.t * sol.t).sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-10);
            prop_assert!((sol.theta - (-sol.lambda1).max(0.0)).abs() <= 1e-12);
            prop_assert!(sol.t >= 0.0, "sign normalization");
        }
    }

    #[test]
    fn context_tracks_solves_and_warm_start_helps() {
        let hess = diag_op(&[-1.0, 2.0]);
        let phi = dvector![1.0, 0.0];
        let ctx = GhmContext::new(&hess, phi.clone(), 1e-10, 9);
        let a = ctx.solve(0.0).unwrap();
        let b = ctx.solve(0.05).unwrap();
        assert_eq!(ctx.solves(), 2);
        assert_eq!(ctx.krylov_iters(), a.eig_iters + b.eig_iters);
        assert!(b.eig_iters <= a.eig_iters);

        // Cold context repeats the first solve count.
        let cold = GhmContext::new(&hess, phi, 1e-10, 9);
        let c = cold.solve(0.05).unwrap();
        assert!(b.eig_iters <= c.eig_iters);
    }

    #[test]
    fn interlacing_guard_rejects_invariant_warm_starts() {
        // Captured from a matrix-balancing run near its minimizer. The
        // Hessian annihilates the all-ones vector exactly and phi is exactly
        // orthogonal to it, so [1; 0] is an eigenvector of the bordered
        // matrix at eigenvalue zero for every delta. The warm start below had
        // collapsed onto that direction, and Lanczos reconverged to the zero
        // eigenpair in three steps, misreporting a semidefinite model even
        // though lambda1(F) <= delta = -0.0577 is certain.
        let h = DMatrix::from_row_slice(
            5,
            5,
            &[
                4.781230923542572,
                -1.6372149373163936,
                -1.2367636186332414,
                -1.1297294576887955,
                -0.7775229099041414,
                -1.6372149373163936,
                5.105800725015932,
                -0.9096474140270798,
                -1.576867047570478,
                -0.9820713261019809,
                -1.2367636186332414,
                -0.9096474140270798,
                4.070712861784976,
                -1.3056665717341773,
                -0.6186352573904774,
                -1.1297294576887955,
                -1.576867047570478,
                -1.3056665717341773,
                5.623946672640705,
                -1.6116835956472544,
                -0.7775229099041414,
                -0.9820713261019809,
                -0.6186352573904774,
                -1.6116835956472544,
                3.9899130890438546,
            ],
        );
        let phi = DVector::from_row_slice(&[
            0.00021769918439673575,
            -0.006655343197074615,
            0.010483180355782551,
            -0.002577602129737233,
            -0.001467934213368105,
        ]);
        let warm = DVector::from_row_slice(&[
            0.4472135904948217,
            0.44721359836367464,
            0.4472135891276126,
            0.44721359928822224,
            0.4472135947374578,
            3.3479251282755655e-9,
        ]);
        let hess = DenseOperator::new(h);
        let spec = GhmSpec {
            hess: &hess,
            phi: &phi,
            delta: -0.057720709988424046,
        };
        let sol = solve_ghm(spec, 1e-10, Some(&warm), 107, 1e-6, 1e8).unwrap();
        assert!(
            sol.lambda1 <= spec.delta + 1e-8,
            "stale warm start masked the leftmost eigenvalue: lambda1 = {}",
            sol.lambda1
        );
        assert!(sol.theta > 0.05);
        assert!(sol.d.is_some());
    }

    #[test]
    fn warm_start_cannot_mask_the_leftmost_direction() {
        // A Hessian null vector orthogonal to phi gives the bordered matrix
        // an exact zero eigenpair at every delta. A semidefinite solve
        // installs that eigenvector as the warm start; the next solve at a
        // negative delta must still honor lambda1(F) <= delta instead of
        // reconverging to the invariant zero direction.
        let n = 12;
        let ones = DVector::from_element(n, 1.0) / (n as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let proj = DMatrix::identity(n, n) - &ones * ones.transpose();
        let hess = DenseOperator::new(&proj * (&raw * raw.transpose()) * &proj);
        let mut phi = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        phi -= &ones * ones.dot(&phi);
        phi *= 1e-4 / phi.norm();

        let ctx = GhmContext::new(&hess, phi, 1e-10, 7);
        let first = ctx.solve(1.0).unwrap();
        assert!(first.semidefinite());
        assert!(first.t.abs() < 1e-6, "zero eigenpair has no border weight");

        let second = ctx.solve(-0.5).unwrap();
        assert!(
            second.lambda1 <= -0.5 + 1e-8,
            "stale warm start masked the leftmost eigenvalue: lambda1 = {}",
            second.lambda1
        );
        assert!(second.theta >= 0.5 - 1e-6);
        assert!(second.d.is_some());
    }
}
