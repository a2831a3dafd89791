//! Matrix-free symmetric operators and adapters.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use super::SymmetricOperator;
use crate::dataio::SparseDataset;

/// Explicit dense symmetric matrix behind the operator interface.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    hint: f64,
    count: Cell<usize>,
}

impl DenseOperator {
    /// Wraps a square matrix; the norm hint is the infinity norm.
    pub fn new(matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "matrix must be square");
        let hint = (0..matrix.nrows())
            .map(|i| matrix.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        Self {
            matrix,
            hint,
            count: Cell::new(0),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        &self.matrix * x
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        Some(self.hint)
    }
}

/// Shifted Hilbert matrix `H + shift * I` with entries `1/(i+j+1)` generated
/// on the fly; nothing is stored.
#[derive(Debug, Clone)]
pub struct HilbertOperator {
    n: usize,
    shift: f64,
    count: Cell<usize>,
}

impl HilbertOperator {
    pub fn new(n: usize, shift: f64) -> Self {
        Self {
            n,
            shift,
            count: Cell::new(0),
        }
    }
}

/// Convenience constructor for [`HilbertOperator`].
pub fn hilbert_operator(n: usize, shift: f64) -> HilbertOperator {
    HilbertOperator::new(n, shift)
}

impl SymmetricOperator for HilbertOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += x[j] / ((i + j + 1) as f64);
            }
            y[i] = s + self.shift * x[i];
        }
        y
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        // The Hilbert matrix has spectral norm below pi at every size.
        Some(std::f64::consts::PI + self.shift.abs())
    }
}

/// Ridge-regularized Gram operator `(1/N) X' X + gamma I` over a sparse
/// dataset, applied without forming the matrix.
#[derive(Debug)]
pub struct NormalEquationsOperator<'a> {
    data: &'a SparseDataset,
    gamma: f64,
    hint: f64,
    count: Cell<usize>,
}

impl<'a> NormalEquationsOperator<'a> {
    pub fn new(data: &'a SparseDataset, gamma: f64) -> Self {
        let n = data.rows().max(1) as f64;
        let hint = data.frobenius_norm_sq() / n + gamma.abs();
        Self {
            data,
            gamma,
            hint,
            count: Cell::new(0),
        }
    }
}

/// Convenience constructor for [`NormalEquationsOperator`].
pub fn normal_equations_operator(data: &SparseDataset, gamma: f64) -> NormalEquationsOperator<'_> {
    NormalEquationsOperator::new(data, gamma)
}

impl SymmetricOperator for NormalEquationsOperator<'_> {
    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        let z = self.data.matvec(x);
        let mut y = self.data.rmatvec(&z);
        let scale = 1.0 / self.data.rows().max(1) as f64;
        y *= scale;
        y.axpy(self.gamma, x, 1.0);
        y
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        Some(self.hint)
    }
}

/// `A + shift * I` on top of any operator.
pub struct ShiftedOperator<'a> {
    inner: &'a dyn SymmetricOperator,
    shift: f64,
    count: Cell<usize>,
}

impl<'a> ShiftedOperator<'a> {
    pub fn new(inner: &'a dyn SymmetricOperator, shift: f64) -> Self {
        Self {
            inner,
            shift,
            count: Cell::new(0),
        }
    }
}

impl SymmetricOperator for ShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        let mut y = self.inner.apply(x);
        y.axpy(self.shift, x, 1.0);
        y
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        self.inner.norm_hint().map(|h| h + self.shift.abs())
    }
}

/// `-A`; lets the leftmost-eigenvalue solver find the rightmost one.
pub struct NegatedOperator<'a> {
    inner: &'a dyn SymmetricOperator,
    count: Cell<usize>,
}

impl<'a> NegatedOperator<'a> {
    pub fn new(inner: &'a dyn SymmetricOperator) -> Self {
        Self {
            inner,
            count: Cell::new(0),
        }
    }
}

impl SymmetricOperator for NegatedOperator<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        -self.inner.apply(x)
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        self.inner.norm_hint()
    }
}

/// Transparent wrapper that only counts applications.
pub struct CountingOperator<'a> {
    inner: &'a dyn SymmetricOperator,
    count: Cell<usize>,
}

impl<'a> CountingOperator<'a> {
    pub fn new(inner: &'a dyn SymmetricOperator) -> Self {
        Self {
            inner,
            count: Cell::new(0),
        }
    }
}

impl SymmetricOperator for CountingOperator<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.count.set(self.count.get() + 1);
        self.inner.apply(x)
    }

    fn matvec_count(&self) -> usize {
        self.count.get()
    }

    fn reset_matvec_count(&self) {
        self.count.set(0);
    }

    fn norm_hint(&self) -> Option<f64> {
        self.inner.norm_hint()
    }
}

/// Recovers the dense matrix by applying the operator to every basis vector.
/// Intended for small-dimension oracle checks.
pub fn materialize(op: &dyn SymmetricOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        m.set_column(j, &op.apply(&e));
        e[j] = 0.0;
    }
    m
}
