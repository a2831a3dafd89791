//! L2-regularized logistic regression with +/-1 labels.

use nalgebra::{DMatrix, DVector};

use crate::dataio::SparseDataset;
use crate::error::{Error, Result};
use crate::krylov::{lanczos_leftmost, normal_equations_operator, NegatedOperator};
use crate::problems::Objective;

/// f(x) = (1/m) sum_i log(1 + exp(-b_i a_i' x)) + (gamma/2) ||x||^2.
pub struct LogisticObjective {
    data: SparseDataset,
    gamma: f64,
    beta: Option<f64>,
}

pub fn logistic_l2_objective(data: SparseDataset, gamma: f64) -> Result<LogisticObjective> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput("ridge weight must be nonnegative".into()));
    }
    for (i, &b) in data.labels().iter().enumerate() {
        if b != 1.0 && b != -1.0 {
            return Err(Error::InvalidInput(format!(
                "label {b} in row {i} is not +/-1"
            )));
        }
    }
    Ok(LogisticObjective {
        data,
        gamma,
        beta: None,
    })
}

/// log(1 + exp(u)) without overflow for large |u|.
fn log1p_exp(u: f64) -> f64 {
    (-u.abs()).exp().ln_1p() + u.max(0.0)
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl LogisticObjective {
    pub fn data(&self) -> &SparseDataset {
        &self.data
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Attaches a concordance constant (see [`concordance_beta_logistic`]).
    pub fn with_concordance_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    fn scale(&self) -> f64 {
        1.0 / self.data.rows().max(1) as f64
    }

    /// Curvature weight sigma(t) sigma(-t) per sample at margins t = b z.
    fn weights(&self, x: &DVector<f64>) -> DVector<f64> {
        let z = self.data.matvec(x);
        DVector::from_fn(self.data.rows(), |i, _| {
            let t = self.data.labels()[i] * z[i];
            sigmoid(t) * sigmoid(-t)
        })
    }
}

impl Objective for LogisticObjective {
    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let z = self.data.matvec(x);
        let mut loss = 0.0;
        for (i, &b) in self.data.labels().iter().enumerate() {
            loss += log1p_exp(-b * z[i]);
        }
        self.scale() * loss + 0.5 * self.gamma * x.norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let z = self.data.matvec(x);
        let w = DVector::from_fn(self.data.rows(), |i, _| {
            let b = self.data.labels()[i];
            -b * sigmoid(-b * z[i])
        });
        self.data.rmatvec(&w) * self.scale() + x * self.gamma
    }

    fn hess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let w = self.weights(x);
        let mut av = self.data.matvec(v);
        av.component_mul_assign(&w);
        self.data.rmatvec(&av) * self.scale() + v * self.gamma
    }

    fn dense_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.dim();
        if n > 500 {
            return None;
        }
        let a = self.data.to_dense();
        let w = self.weights(x);
        let mut scaled = a.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let mut h = a.transpose() * scaled * self.scale();
        for i in 0..n {
            h[(i, i)] += self.gamma;
        }
        Some(h)
    }

    fn name(&self) -> &str {
        "logistic-l2"
    }

    fn convex(&self) -> bool {
        true
    }

    fn concordance_beta(&self) -> Option<f64> {
        self.beta
    }

    fn hessian_norm_hint(&self, _x: &DVector<f64>) -> Option<f64> {
        Some(0.25 * self.scale() * self.data.frobenius_norm_sq() + self.gamma)
    }
}

/// Concordance analysis for the regularized logistic loss.
///
/// Returns `(threshold_ok, beta)` where `threshold_ok` reports whether
/// `gamma` clears `(2/m) sum_i ||a_i||^2`, and `beta` is the concordance
/// constant `||A'|| M / (2 mu)` built from the third-derivative bound of the
/// logistic sigmoid (`M = 1/(6 sqrt 3)`) and the curvature floor
/// `mu = gamma / nu` with `nu` the largest eigenvalue of `(1/m) A'A`.
pub fn concordance_beta_logistic(data: &SparseDataset, gamma: f64) -> Result<(bool, f64)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(
            "concordance analysis needs a positive ridge weight".into(),
        ));
    }
    let m = data.rows().max(1) as f64;
    let threshold_ok = gamma > 2.0 / m * data.frobenius_norm_sq();

    let gram = normal_equations_operator(data, 0.0);
    let flipped = NegatedOperator::new(&gram);
    let eig = lanczos_leftmost(&flipped, 1e-10, 8 * data.cols().max(8), None, 0x5eed)?;
    let nu = -eig.value;
    if nu <= 0.0 {
        return Err(Error::InvalidInput(
            "design matrix has no curvature; concordance constant undefined".into(),
        ));
    }
    let m_logit = 1.0 / (6.0 * 3.0f64.sqrt());
    let mu = gamma / nu;
    let op_norm = (m * nu).sqrt();
    Ok((threshold_ok, op_norm * m_logit / (2.0 * mu)))
}
