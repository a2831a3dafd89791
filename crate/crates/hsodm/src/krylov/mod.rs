//! Matrix-free symmetric operators and the Krylov engines built on them:
//! Lanczos for the leftmost eigenpair (full reorthogonalization), conjugate
//! gradients, and GMRES with optional restarts.

mod cg;
mod gmres;
mod lanczos;
mod operators;
mod tridiag;

pub use cg::cg_solve;
pub use gmres::gmres_solve;
pub use lanczos::lanczos_leftmost;
pub use operators::{
    hilbert_operator, materialize, normal_equations_operator, CountingOperator, DenseOperator,
    HilbertOperator, NegatedOperator, NormalEquationsOperator, ShiftedOperator,
};
pub use tridiag::tridiag_leftmost;

use nalgebra::DVector;

/// Matrix-free symmetric linear map with a per-run matvec counter.
///
/// `apply` must not mutate its input or any state that changes later results;
/// the counter is the only interior mutability allowed.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Number of `apply` calls since construction or the last reset.
    fn matvec_count(&self) -> usize;

    fn reset_matvec_count(&self);

    /// Optional upper bound on the operator 2-norm, used to scale residual
    /// stopping tests. Solvers fall back to a short power-iteration estimate
    /// when absent.
    fn norm_hint(&self) -> Option<f64> {
        None
    }
}

/// Leftmost Ritz pair returned by [`lanczos_leftmost`].
#[derive(Debug, Clone)]
pub struct EigResult {
    pub value: f64,
    /// Unit eigenvector estimate.
    pub vector: DVector<f64>,
    /// Lanczos recurrence steps taken (equivalently, recurrence matvecs).
    pub iters: usize,
    /// True residual norm `||A y - lambda y||` at acceptance.
    pub residual: f64,
}

/// Outcome of a linear solve by [`cg_solve`] or [`gmres_solve`].
#[derive(Debug, Clone)]
pub struct LinSolveResult {
    pub solution: DVector<f64>,
    /// Matvecs spent by the solver.
    pub iters: usize,
    pub converged: bool,
    pub residual_norm: f64,
}
