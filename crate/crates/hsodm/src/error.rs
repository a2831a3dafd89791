//! Crate-wide error type.

use nalgebra::DVector;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Best Ritz pair retained when an eigensolve stops without meeting its
/// residual tolerance.
#[derive(Debug, Clone)]
pub struct RitzSnapshot {
    pub value: f64,
    pub vector: DVector<f64>,
    pub residual: f64,
    pub iters: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "eigensolver did not reach tolerance after {} iterations (best Ritz value {:.6e}, residual {:.3e})",
        best.iters, best.value, best.residual
    )]
    EigenNonConvergence { best: Box<RitzSnapshot> },

    #[error("nonpositive curvature p'Ap = {curvature:.3e} at CG iteration {iter}")]
    IndefiniteOperator { curvature: f64, iter: usize },

    /// The homogeneous model returned an eigenvector with |t| at or below the
    /// configured threshold. Carries the Hessian's leftmost eigenvalue and
    /// (unit) eigenvector recovered from the failed solve so callers can
    /// perturb without re-solving.
    #[error("hard case: |t| = {t_abs:.3e} with lambda1(H) ~ {lambda1:.6e}")]
    HardCase {
        lambda1: f64,
        eigvec: Box<DVector<f64>>,
        t_abs: f64,
    },

    #[error("bisection bracket degenerated to width {width:.3e} without hitting the target interval")]
    DegenerateInterval { width: f64 },

    #[error("bisection budget of {steps} steps exhausted")]
    BisectionBudget { steps: usize },

    #[error(
        "theta search stalled after {steps} steps (best theta {best_theta:.6e} at delta {best_delta:.6e}, target {target:.6e})"
    )]
    ThetaSearchStalled {
        steps: usize,
        best_delta: f64,
        best_theta: f64,
        target: f64,
    },

    #[error("radius search did not converge in {steps} steps (last step norm {last_norm:.6e}, radius {radius:.6e})")]
    RadiusSearchStalled {
        steps: usize,
        last_norm: f64,
        radius: f64,
    },

    #[error("hard-case escape failed after {escalations} escalations from h = {h_entry:.3e} (lambda1 = {lambda1:.6e})")]
    EscapeFailed {
        escalations: usize,
        h_entry: f64,
        lambda1: f64,
    },

    /// A hard case surfaced inside the homotopy path, which only happens when
    /// the objective is not convex as assumed.
    #[error("hard case on the homotopy path (lambda1 = {lambda1:.6e}); objective is not convex as configured")]
    ConvexityViolation { lambda1: f64 },

    /// Inner centering loop exceeded its budget, which indicates the
    /// configured concordance constant beta is too small for the objective.
    #[error("centering did not finish within {max_inner} inner steps at mu = {mu:.3e}; configured beta is likely too small")]
    CenteringBudget { max_inner: usize, mu: f64 },

    #[error("line search failed to make progress after {backtracks} halvings")]
    LineSearchStalled { backtracks: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
