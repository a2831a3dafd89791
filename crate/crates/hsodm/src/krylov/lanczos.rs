//! Leftmost eigenpair via Lanczos with full reorthogonalization.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tridiag::tridiag_leftmost;
use super::{EigResult, SymmetricOperator};
use crate::error::{Error, Result, RitzSnapshot};

/// Computes the smallest eigenvalue and an eigenvector of `op`.
///
/// Stops when the true residual satisfies
/// `||A y - lambda y|| <= tol * max(1, |lambda|, norm_hint)`. The hint comes
/// from the operator or, if absent, a 10-step power-iteration estimate (those
/// matvecs hit the operator counter but are not part of `iters`). The run is
/// deterministic for a fixed `seed` and `start`.
pub fn lanczos_leftmost(
    op: &dyn SymmetricOperator,
    tol: f64,
    max_iter: usize,
    start: Option<&DVector<f64>>,
    seed: u64,
) -> Result<EigResult> {
    lanczos_leftmost_traced(op, tol, max_iter, start, seed, None)
}

/// Same as [`lanczos_leftmost`] but optionally records the Ritz value after
/// every recurrence step (used by tests asserting monotone convergence).
pub(crate) fn lanczos_leftmost_traced(
    op: &dyn SymmetricOperator,
    tol: f64,
    max_iter: usize,
    start: Option<&DVector<f64>>,
    seed: u64,
    mut ritz_history: Option<&mut Vec<f64>>,
) -> Result<EigResult> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidInput("operator dimension is zero".into()));
    }
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(max_iter > 0, "max_iter must be positive");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hint = match op.norm_hint() {
        Some(h) => h,
        None => power_norm_estimate(op, &mut rng, 10),
    };

    let mut v = match start {
        Some(s) => {
            let norm = s.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidInput("start vector has invalid norm".into()));
            }
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.len(),
                });
            }
            s / norm
        }
        None => random_unit(&mut rng, n),
    };

    let cap = max_iter.min(n);
    let mut basis: Vec<DVector<f64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::with_capacity(cap);
    let mut betas: Vec<f64> = Vec::with_capacity(cap);
    let mut v_prev: Option<DVector<f64>> = None;
    let mut beta_prev = 0.0;
    let mut best: Option<RitzSnapshot> = None;

    for j in 1..=cap {
        let mut w = op.apply(&v);
        let alpha = v.dot(&w);
        w.axpy(-alpha, &v, 1.0);
        if let Some(ref vp) = v_prev {
            w.axpy(-beta_prev, vp, 1.0);
        }
        // Full reorthogonalization, two sweeps.
        for _ in 0..2 {
            for u in &basis {
                let c = u.dot(&w);
                w.axpy(-c, u, 1.0);
            }
        }
        alphas.push(alpha);

        let (ritz, s) = tridiag_leftmost(&alphas, &betas);
        if let Some(hist) = ritz_history.as_deref_mut() {
            hist.push(ritz);
        }
        let beta = w.norm();
        let threshold = tol * 1.0f64.max(ritz.abs()).max(hint);
        let estimate = beta * s[s.len() - 1].abs();
        let breakdown = beta <= 1e-13 * hint.max(1.0);
        let exhausted = j == cap;

        if estimate <= threshold || breakdown || exhausted {
            let mut y = DVector::zeros(n);
            for (i, u) in basis.iter().enumerate() {
                y.axpy(s[i], u, 1.0);
            }
            let ynorm = y.norm();
            if ynorm > 0.0 {
                y /= ynorm;
            }
            fix_sign(&mut y);
            let residual = (op.apply(&y) - ritz * &y).norm();
            if residual <= threshold {
                return Ok(EigResult {
                    value: ritz,
                    vector: y,
                    iters: j,
                    residual,
                });
            }
            let better = best
                .as_ref()
                .map(|b| residual < b.residual)
                .unwrap_or(true);
            if better {
                best = Some(RitzSnapshot {
                    value: ritz,
                    vector: y,
                    residual,
                    iters: j,
                });
            }
            if breakdown || exhausted {
                return Err(Error::EigenNonConvergence {
                    best: Box::new(best.expect("snapshot recorded above")),
                });
            }
        }

        betas.push(beta);
        beta_prev = beta;
        v_prev = Some(v);
        v = w / beta;
        basis.push(v.clone());
    }
    unreachable!("loop returns at j == cap")
}

fn fix_sign(y: &mut DVector<f64>) {
    let mut imax = 0;
    for i in 1..y.len() {
        if y[i].abs() > y[imax].abs() {
            imax = i;
        }
    }
    if y[imax] < 0.0 {
        y.neg_mut();
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

fn power_norm_estimate(op: &dyn SymmetricOperator, rng: &mut ChaCha8Rng, steps: usize) -> f64 {
    let mut x = random_unit(rng, op.dim());
    let mut nu = 0.0;
    for _ in 0..steps {
        let y = op.apply(&x);
        nu = y.norm();
        if nu <= 1e-300 {
            return 0.0;
        }
        x = y / nu;
    }
    nu
}
