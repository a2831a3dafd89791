//! Matrix-free second-order optimization via homogeneous eigenvalue models.
//!
//! The core idea: instead of solving the Newton system `H d = -g` with a
//! linear solver, aggregate the Hessian operator `H`, a gradient-like vector
//! `phi`, and a scalar control `delta` into the bordered symmetric operator
//!
//! ```text
//!     F = [ H    phi ]
//!         [ phi'  delta ]
//! ```
//!
//! and compute its leftmost eigenpair `[v; t]`. The step `d = v / t` inherits
//! curvature information for free: one eigenvalue solve replaces the linear
//! solve, stays matrix-free, and degrades gracefully on ill-conditioned or
//! indefinite problems where CG and GMRES stall.
//!
//! The crate provides:
//!
//! - [`krylov`]: matrix-free symmetric operators plus the three Krylov
//!   engines (Lanczos leftmost eigenpair with full reorthogonalization, CG,
//!   GMRES with optional restarts).
//! - [`ghm`]: building and solving the homogeneous model, its primal-dual
//!   solution, the auxiliary functions `Delta`, `omega`, `h` of `delta`, and
//!   hard-case diagnostics.
//! - [`rootfind`]: one-dimensional searches over `delta` (bracketed bisection
//!   on `h`, trust-region radius recovery, safeguarded Newton on `theta`).
//! - [`adaptive`]: the adaptive second-order descent loop for nonconvex
//!   objectives with a cubic-model ratio test, target-interval updates for
//!   `sqrt(h)`, and a perturbation escape for the hard case.
//! - [`homotopy`]: path-following for concordant convex objectives with
//!   inexact centering, a geometric `mu` schedule, and eigenvector warm
//!   starts.
//! - [`variants`]: classical steps recovered through the homogeneous model
//!   (trust-region step, gradient-regularized Newton step) and an inexact
//!   Newton line-search baseline.
//! - [`problems`], [`dataio`]: test objectives with analytic derivatives,
//!   LIBSVM parsing, and seeded synthetic datasets.
//! - [`trace`], [`harness`]: per-iteration telemetry records, CSV/JSON
//!   emission, and the benchmark harness behind the `hsodm` binary.

pub mod adaptive;
pub mod dataio;
pub mod error;
pub mod ghm;
pub mod harness;
pub mod homotopy;
pub mod krylov;
pub mod problems;
pub mod rootfind;
pub mod trace;
pub mod variants;

pub use error::{Error, Result};
