//! Conjugate gradients for positive definite systems.

use nalgebra::DVector;

use super::{LinSolveResult, SymmetricOperator};
use crate::error::{Error, Result};

/// Solves `A x = b` for symmetric positive definite `A`.
///
/// Starts from the zero vector and stops once the recurrence residual
/// satisfies `||r|| <= tol * max(1, ||b||)`. `iters` equals the number of
/// operator applications performed by the recurrence. Encountering
/// non-positive curvature `p' A p <= 0` aborts with
/// [`Error::IndefiniteOperator`].
pub fn cg_solve(
    op: &dyn SymmetricOperator,
    b: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<LinSolveResult> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    assert!(tol > 0.0, "tolerance must be positive");

    let threshold = tol * 1.0f64.max(b.norm());
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut rho = r.norm_squared();
    if rho.sqrt() <= threshold {
        return Ok(LinSolveResult {
            solution: x,
            iters: 0,
            converged: true,
            residual_norm: rho.sqrt(),
        });
    }
    let mut p = r.clone();

    for k in 1..=max_iter {
        let ap = op.apply(&p);
        let curvature = p.dot(&ap);
        if curvature <= 0.0 {
            return Err(Error::IndefiniteOperator {
                curvature,
                iter: k,
            });
        }
        let alpha = rho / curvature;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rho_next = r.norm_squared();
        if rho_next.sqrt() <= threshold {
            return Ok(LinSolveResult {
                solution: x,
                iters: k,
                converged: true,
                residual_norm: rho_next.sqrt(),
            });
        }
        let beta = rho_next / rho;
        rho = rho_next;
        p = &r + beta * p;
    }

    Ok(LinSolveResult {
        solution: x,
        iters: max_iter,
        converged: false,
        residual_norm: rho.sqrt(),
    })
}
