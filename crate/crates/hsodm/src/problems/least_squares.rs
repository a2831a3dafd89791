//! Ridge-regularized least squares over a sparse dataset.

use nalgebra::{DMatrix, DVector};

use crate::dataio::SparseDataset;
use crate::problems::Objective;

/// f(x) = (1/2N) ||Ax - y||^2 + (gamma/2) ||x||^2 with the dataset labels
/// playing the role of y.
pub struct LeastSquaresObjective {
    data: SparseDataset,
    gamma: f64,
}

pub fn least_squares_objective(data: SparseDataset, gamma: f64) -> LeastSquaresObjective {
    assert!(gamma >= 0.0 && gamma.is_finite(), "ridge weight must be nonnegative");
    LeastSquaresObjective { data, gamma }
}

impl LeastSquaresObjective {
    pub fn data(&self) -> &SparseDataset {
        &self.data
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut r = self.data.matvec(x);
        for (i, &y) in self.data.labels().iter().enumerate() {
            r[i] -= y;
        }
        r
    }

    fn scale(&self) -> f64 {
        1.0 / self.data.rows().max(1) as f64
    }
}

impl Objective for LeastSquaresObjective {
    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let r = self.residual(x);
        0.5 * self.scale() * r.norm_squared() + 0.5 * self.gamma * x.norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let r = self.residual(x);
        self.data.rmatvec(&r) * self.scale() + x * self.gamma
    }

    fn hess_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let av = self.data.matvec(v);
        self.data.rmatvec(&av) * self.scale() + v * self.gamma
    }

    fn dense_hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.dim();
        if n > 500 {
            return None;
        }
        let a = self.data.to_dense();
        let mut h = a.transpose() * &a * self.scale();
        for i in 0..n {
            h[(i, i)] += self.gamma;
        }
        Some(h)
    }

    fn name(&self) -> &str {
        "least-squares"
    }

    fn convex(&self) -> bool {
        true
    }

    fn concordance_beta(&self) -> Option<f64> {
        // Quadratics have no third-order variation at all.
        Some(0.0)
    }

    fn hessian_norm_hint(&self, _x: &DVector<f64>) -> Option<f64> {
        Some(self.scale() * self.data.frobenius_norm_sq() + self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{synthetic_dataset, LabelModel};
    use crate::problems::check_derivatives;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn identity_data(labels: Vec<f64>) -> SparseDataset {
        SparseDataset::new(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0], labels).unwrap()
    }

    #[test]
    fn value_and_gradient_on_identity_design() {
        let obj = least_squares_objective(identity_data(vec![0.0, 0.0]), 0.0);
        let x = dvector![1.0, 2.0];
        assert_relative_eq!(obj.value(&x), 1.25, epsilon = 1e-14);
        let g = obj.gradient(&x);
        assert_relative_eq!(g[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(g[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_fit_leaves_only_the_ridge_term() {
        let gamma = 0.5;
        let obj = least_squares_objective(identity_data(vec![1.0, 2.0]), gamma);
        let x = dvector![1.0, 2.0];
        let g = obj.gradient(&x);
        assert_relative_eq!((g - &x * gamma).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dense_hessian_matches_hess_vec() {
        let data = synthetic_dataset(7, 6, 20, 0.8, LabelModel::Linear);
        let obj = least_squares_objective(data, 1e-3);
        let x = dvector![0.1, -0.2, 0.3, 0.0, 0.5, -0.1];
        let h = obj.dense_hessian(&x).unwrap();
        let v = dvector![1.0, -1.0, 0.5, 2.0, 0.0, -0.5];
        assert_relative_eq!((&h * &v - obj.hess_vec(&x, &v)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn derivatives_agree_with_finite_differences() {
        let data = synthetic_dataset(3, 5, 15, 0.7, LabelModel::Linear);
        let obj = least_squares_objective(data, 0.05);
        let points = vec![
            dvector![0.2, -0.4, 0.1, 0.9, -0.3],
            dvector![1.0, 1.0, 1.0, 1.0, 1.0],
        ];
        let report = check_derivatives(&obj, &points, 1e-5, 1e-4);
        assert!(report.passed(), "failures: {:?}", report.failures);
    }

    #[test]
    fn norm_hint_bounds_the_hessian() {
        let data = synthetic_dataset(11, 4, 12, 0.9, LabelModel::Linear);
        let obj = least_squares_objective(data, 0.2);
        let x = DVector::zeros(4);
        let h = obj.dense_hessian(&x).unwrap();
        let spectral = h.symmetric_eigen().eigenvalues.amax();
        assert!(obj.hessian_norm_hint(&x).unwrap() >= spectral);
    }
}
