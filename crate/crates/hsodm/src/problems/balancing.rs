//! Matrix balancing: choose a diagonal similarity scaling that equalizes
//! row and column mass of a nonnegative matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problems::Objective;

/// f(x) = sum_{ij} a_ij exp(x_i - x_j). Translation invariant along the
/// all-ones direction, so the Hessian is always singular.
pub struct BalancingObjective {
    a: DMatrix<f64>,
}

pub fn matrix_balancing_objective(a: DMatrix<f64>) -> Result<BalancingObjective> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    for &v in a.iter() {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "balancing weights must be finite and nonnegative, found {v}"
            )));
        }
    }
    Ok(BalancingObjective { a })
}

impl BalancingObjective {
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Outflow (row) and inflow (column) exponential mass at `x`.
    fn flows(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let n = self.a.nrows();
        let mut out = DVector::zeros(n);
        let mut inflow = DVector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = self.a[(i, j)] * (x[i] - x[j]).exp();
                out[i] += w;
                inflow[j] += w;
            }
        }
        (out, inflow)
    }
}

impl Objective for BalancingObjective {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let n = self.a.nrows();
        let mut f = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = self.a[(i, j)];
                if w != 0.0 {
                    f += w * (x[i] - x[j]).exp();
                }
            }
        }
        f
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (out, inflow) = self.flows(x);
        out - inflow
    }

    fn hess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.a.nrows();
        let mut hv = DVector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = self.a[(i, j)] * (x[i] - x[j]).exp();
                if w != 0.0 {
                    let diff = v[i] - v[j];
                    hv[i] += w * diff;
                    hv[j] -= w * diff;
                }
            }
        }
        hv
    }

    fn dense_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.a.nrows();
        if n > 100 {
            return None;
        }
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = self.a[(i, j)] * (x[i] - x[j]).exp();
                h[(i, i)] += w;
                h[(j, j)] += w;
                h[(i, j)] -= w;
                h[(j, i)] -= w;
            }
        }
        Some(h)
    }

    fn name(&self) -> &str {
        "matrix-balancing"
    }

    fn convex(&self) -> bool {
        true
    }

    fn concordance_beta(&self) -> Option<f64> {
        Some(2.0)
    }

    fn hessian_norm_hint(&self, x: &DVector<f64>) -> Option<f64> {
        // Off-diagonal absolute mass per row equals the diagonal, so the
        // infinity norm is twice the largest diagonal entry.
        let (out, inflow) = self.flows(x);
        Some(2.0 * (out + inflow).amax())
    }
}
