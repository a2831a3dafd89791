//! GMRES with optional restarting, for the Newton-system baselines.

use nalgebra::{DMatrix, DVector};

use super::{LinSolveResult, SymmetricOperator};
use crate::error::{Error, Result};

/// Solves `A x = b` by restarted GMRES.
///
/// `restart` of `None` runs a single full cycle of up to `max_iter` Arnoldi
/// steps. Otherwise each cycle spans at most `restart` steps and the total
/// operator applications are capped by `max_iter`; the explicit residual
/// matvec at the end of a cycle counts toward that budget. Starts from zero
/// and stops at `||r|| <= tol * max(1, ||b||)`.
pub fn gmres_solve(
    op: &dyn SymmetricOperator,
    b: &DVector<f64>,
    tol: f64,
    max_iter: usize,
    restart: Option<usize>,
) -> Result<LinSolveResult> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    assert!(tol > 0.0, "tolerance must be positive");
    if let Some(m) = restart {
        assert!(m > 0, "restart length must be positive");
    }

    let threshold = tol * 1.0f64.max(b.norm());
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut rnorm = r.norm();
    let mut used = 0usize;

    if rnorm <= threshold {
        return Ok(LinSolveResult {
            solution: x,
            iters: 0,
            converged: true,
            residual_norm: rnorm,
        });
    }

    while used < max_iter {
        let cycle_cap = restart.unwrap_or(max_iter).min(max_iter - used).min(n);
        if cycle_cap == 0 {
            break;
        }
        let (dx, steps, est) = arnoldi_cycle(op, &r, rnorm, threshold, cycle_cap);
        used += steps;
        x += dx;

        if restart.is_none() {
            // Single cycle: trust the rotation-based estimate, report it.
            rnorm = est;
            return Ok(LinSolveResult {
                solution: x,
                iters: used,
                converged: rnorm <= threshold,
                residual_norm: rnorm,
            });
        }

        // Restarted: measure the true residual before deciding to go on.
        if used >= max_iter {
            rnorm = est;
            break;
        }
        r = b - op.apply(&x);
        used += 1;
        rnorm = r.norm();
        if rnorm <= threshold {
            return Ok(LinSolveResult {
                solution: x,
                iters: used,
                converged: true,
                residual_norm: rnorm,
            });
        }
    }

    Ok(LinSolveResult {
        solution: x,
        iters: used,
        converged: rnorm <= threshold,
        residual_norm: rnorm,
    })
}

/// Runs one Arnoldi/Givens cycle from residual `r0` with `||r0|| = beta0`.
/// Returns the correction, the number of matvecs spent, and the final
/// rotation-based residual estimate.
fn arnoldi_cycle(
    op: &dyn SymmetricOperator,
    r0: &DVector<f64>,
    beta0: f64,
    threshold: f64,
    cap: usize,
) -> (DVector<f64>, usize, f64) {
    let n = op.dim();
    let mut basis: Vec<DVector<f64>> = vec![r0 / beta0];
    let mut h = DMatrix::<f64>::zeros(cap + 1, cap);
    let mut cs = vec![0.0f64; cap];
    let mut sn = vec![0.0f64; cap];
    let mut g = DVector::zeros(cap + 1);
    g[0] = beta0;

    let mut k = 0;
    while k < cap {
        let mut w = op.apply(&basis[k]);
        // Modified Gram-Schmidt with one extra pass for stability.
        for _ in 0..2 {
            for (i, u) in basis.iter().enumerate() {
                let c = u.dot(&w);
                h[(i, k)] += c;
                w.axpy(-c, u, 1.0);
            }
        }
        let hnext = w.norm();
        h[(k + 1, k)] = hnext;

        // Apply the accumulated rotations to the new column, then a fresh one.
        for i in 0..k {
            let tmp = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
            h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
            h[(i, k)] = tmp;
        }
        let denom = (h[(k, k)] * h[(k, k)] + hnext * hnext).sqrt();
        if denom <= f64::MIN_POSITIVE {
            cs[k] = 1.0;
            sn[k] = 0.0;
        } else {
            cs[k] = h[(k, k)] / denom;
            sn[k] = hnext / denom;
        }
        h[(k, k)] = cs[k] * h[(k, k)] + sn[k] * h[(k + 1, k)];
        h[(k + 1, k)] = 0.0;
        g[k + 1] = -sn[k] * g[k];
        g[k] *= cs[k];

        k += 1;
        let est = g[k].abs();
        if est <= threshold || hnext <= f64::MIN_POSITIVE {
            break;
        }
        basis.push(w / hnext);
    }

    // Back substitution on the k x k triangular system.
    let mut y = DVector::zeros(k);
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[(i, j)] * y[j];
        }
        y[i] = if h[(i, i)].abs() <= f64::MIN_POSITIVE {
            0.0
        } else {
            s / h[(i, i)]
        };
    }
    let mut dx = DVector::zeros(n);
    for i in 0..k {
        dx.axpy(y[i], &basis[i], 1.0);
    }
    (dx, k, g[k].abs())
}
