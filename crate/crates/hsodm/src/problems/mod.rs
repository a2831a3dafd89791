//! Objective functions with analytic derivatives, a Hessian-operator
//! adapter, and finite-difference derivative checking.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::krylov::SymmetricOperator;

mod balancing;
mod fixtures;
mod least_squares;
mod logistic;

pub use balancing::{matrix_balancing_objective, BalancingObjective};
pub use fixtures::{
    quadratic_objective, quartic_objective, saddle_objective, Exp1dObjective,
    QuadraticObjective, QuarticObjective, SaddleObjective,
};
pub use least_squares::{least_squares_objective, LeastSquaresObjective};
pub use logistic::{concordance_beta_logistic, logistic_l2_objective, LogisticObjective};

/// A twice-differentiable objective exposing matrix-free Hessian access.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    /// Explicit Hessian for oracle checks at desk scale; `None` when the
    /// dimension makes that unreasonable.
    fn dense_hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    fn name(&self) -> &str;

    /// Whether the objective is convex everywhere.
    fn convex(&self) -> bool;

    /// Concordance constant relating third-order variation to Hessian
    /// curvature, when known.
    fn concordance_beta(&self) -> Option<f64> {
        None
    }

    /// Estimate of the Hessian Lipschitz constant, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    /// Upper bound on the Hessian spectral norm at `x`, when cheap.
    fn hessian_norm_hint(&self, _x: &DVector<f64>) -> Option<f64> {
        None
    }
}

/// The Hessian of an objective frozen at a point, viewed as a symmetric
/// operator (what the bordered model consumes).
pub struct HessianAt<'a> {
    obj: &'a dyn Objective,
    x: DVector<f64>,
    count: Cell<usize>,
}

impl<'a> HessianAt<'a> {
    pub fn new(obj: &'a dyn Objective, x: DVector<f64>) -> Self {
        assert_eq!(obj.dim(), x.len());
        Self {
            obj,
            x,
            count: Cell::new(0),
        }
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.x
    }
}

impl SymmetricOperator for HessianAt<'_> {
    fn dim(&self) -> usize {
        self.obj.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        self.obj.hess_vec(&self.x, v)
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        self.obj.hessian_norm_hint(&self.x)
    }
}

/// Outcome of comparing analytic derivatives against central differences.
#[derive(Debug, Clone)]
pub struct DerivativeReport {
    pub max_grad_rel_err: f64,
    pub max_hess_rel_err: f64,
    pub failures: Vec<String>,
}

impl DerivativeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the gradient against central differences of the value and
/// `hess_vec` against central differences of the gradient at each point.
pub fn check_derivatives(
    obj: &dyn Objective,
    points: &[DVector<f64>],
    tol_g: f64,
    tol_h: f64,
) -> DerivativeReport {
    let n = obj.dim();
    let mut max_g = 0.0f64;
    let mut max_h = 0.0f64;
    let mut failures = Vec::new();

    for (pi, x) in points.iter().enumerate() {
        assert_eq!(x.len(), n);
        let g = obj.gradient(x);
        let mut g_fd = DVector::zeros(n);
        for i in 0..n {
            let h = 1e-5 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            g_fd[i] = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
        }
        let err_g = (&g_fd - &g).norm() / g.norm().max(1.0);
        max_g = max_g.max(err_g);
        if err_g > tol_g {
            failures.push(format!("point {pi}: gradient error {err_g:.3e} > {tol_g:.1e}"));
        }

        // Two deterministic directions per point keep the check cheap while
        // still exercising off-diagonal coupling.
        for (di, v) in [
            DVector::from_element(n, 1.0) / (n as f64).sqrt(),
            DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 }) / (n as f64).sqrt(),
        ]
        .iter()
        .enumerate()
        {
            let hv = obj.hess_vec(x, v);
            let h = 1e-5 * (1.0 + x.norm());
            let xp = x + v * h;
            let xm = x - v * h;
            let hv_fd = (obj.gradient(&xp) - obj.gradient(&xm)) / (2.0 * h);
            let err_h = (&hv_fd - &hv).norm() / hv.norm().max(1.0);
            max_h = max_h.max(err_h);
            if err_h > tol_h {
                failures.push(format!(
                    "point {pi}, direction {di}: hess_vec error {err_h:.3e} > {tol_h:.1e}"
                ));
            }
        }
    }

    DerivativeReport {
        max_grad_rel_err: max_g,
        max_hess_rel_err: max_h,
        failures,
    }
}
