//! Small closed-form objectives used as optimizer test beds.

use nalgebra::{dvector, DMatrix, DVector};

use crate::problems::Objective;

/// f(x) = -x_1^2/2 + x_2^2: a strict saddle at the origin whose negative
/// curvature direction is orthogonal to the gradient everywhere on the
/// x_2 axis.
pub struct SaddleObjective;

pub fn saddle_objective() -> SaddleObjective {
    SaddleObjective
}

impl Objective for SaddleObjective {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        -0.5 * x[0] * x[0] + x[1] * x[1]
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        dvector![-x[0], 2.0 * x[1]]
    }

    fn hess_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        dvector![-v[0], 2.0 * v[1]]
    }

    fn dense_hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&dvector![-1.0, 2.0]))
    }

    fn name(&self) -> &str {
        "saddle"
    }

    fn convex(&self) -> bool {
        false
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(0.0)
    }

    fn hessian_norm_hint(&self, _x: &DVector<f64>) -> Option<f64> {
        Some(2.0)
    }
}

/// f(x) = -x_1^2/2 + x_1^4/4 + x_2^2/2: two global minima at (+-1, 0) with
/// value -1/4, separated by a saddle at the origin.
pub struct QuarticObjective;

pub fn quartic_objective() -> QuarticObjective {
    QuarticObjective
}

impl Objective for QuarticObjective {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let a = x[0];
        -0.5 * a * a + 0.25 * a * a * a * a + 0.5 * x[1] * x[1]
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        dvector![x[0] * x[0] * x[0] - x[0], x[1]]
    }

    fn hess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        dvector![(3.0 * x[0] * x[0] - 1.0) * v[0], v[1]]
    }

    fn dense_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&dvector![3.0 * x[0] * x[0] - 1.0, 1.0]))
    }

    fn name(&self) -> &str {
        "quartic"
    }

    fn convex(&self) -> bool {
        false
    }

    /// Hessian Lipschitz constant on the |x_1| <= 2 box the test starts
    /// stay inside.
    fn lipschitz_hint(&self) -> Option<f64> {
        Some(12.0)
    }

    fn hessian_norm_hint(&self, x: &DVector<f64>) -> Option<f64> {
        Some((3.0 * x[0] * x[0] - 1.0).abs().max(1.0))
    }
}

/// One-dimensional exponential, the textbook curvature-concordant function:
/// the gradient's Taylor remainder is bounded by the Hessian quadratic form
/// with constant 1 on unit steps.
pub struct Exp1dObjective;

impl Objective for Exp1dObjective {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        x[0].exp()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        dvector![x[0].exp()]
    }

    fn hess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        dvector![x[0].exp() * v[0]]
    }

    fn dense_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, x[0].exp()))
    }

    fn name(&self) -> &str {
        "exp-1d"
    }

    fn convex(&self) -> bool {
        true
    }

    fn concordance_beta(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// f(x) = x'Ax/2 + b'x for a dense symmetric A.
pub struct QuadraticObjective {
    a: DMatrix<f64>,
    b: DVector<f64>,
    convex: bool,
}

pub fn quadratic_objective(a: DMatrix<f64>, b: DVector<f64>) -> QuadraticObjective {
    assert_eq!(a.nrows(), a.ncols());
    assert_eq!(a.nrows(), b.len());
    let scale = a.amax().max(1.0);
    let convex = a
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .min()
        >= -1e-12 * scale;
    QuadraticObjective { a, b, convex }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b
    }

    fn hess_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.a * v
    }

    fn dense_hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(self.a.clone())
    }

    fn name(&self) -> &str {
        "quadratic"
    }

    fn convex(&self) -> bool {
        self.convex
    }

    fn concordance_beta(&self) -> Option<f64> {
        self.convex.then_some(0.0)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(0.0)
    }

    fn hessian_norm_hint(&self, _x: &DVector<f64>) -> Option<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.a.nrows() {
            worst = worst.max(self.a.row(i).iter().map(|v| v.abs()).sum());
        }
        Some(worst)
    }
}
