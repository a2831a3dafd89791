//! Leftmost eigenpair of a symmetric tridiagonal matrix via Sturm-sequence
//! bisection plus inverse iteration. Keeps the per-step cost of tracking the
//! smallest Ritz value inside Lanczos at O(m) instead of a full dense
//! eigendecomposition of the projected matrix.

/// Returns `(eigenvalue, unit eigenvector)` of the smallest eigenvalue of the
/// symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
pub fn tridiag_leftmost(diag: &[f64], off: &[f64]) -> (f64, Vec<f64>) {
    let m = diag.len();
    assert!(m >= 1 && off.len() + 1 == m, "inconsistent tridiagonal sizes");
    if m == 1 {
        return (diag[0], vec![1.0]);
    }

    // Gershgorin interval containing the whole spectrum.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < m { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);

    // Smallest eigenvalue = inf { x : at least one eigenvalue below x }.
    let mut a = lo;
    let mut b = hi;
    for _ in 0..160 {
        if b - a <= 1e-16 * scale {
            break;
        }
        let mid = 0.5 * (a + b);
        if count_below(diag, off, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let lambda = 0.5 * (a + b);
    let vector = inverse_iteration(diag, off, lambda);
    (lambda, vector)
}

/// Number of eigenvalues strictly below `x` (Sturm count via the LDL'
/// recurrence, with the usual tiny-pivot safeguard).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE;
    let mut count = 0usize;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if d.abs() < tiny {
            if d < 0.0 {
                -tiny
            } else {
                tiny
            }
        } else {
            d
        };
        d = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let m = diag.len();
    let mut y = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..3 {
        let mut z = solve_shifted(diag, off, lambda, &y);
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !n.is_finite() || n == 0.0 {
            break;
        }
        for v in &mut z {
            *v /= n;
        }
        y = z;
    }
    // Deterministic sign: largest-magnitude entry positive.
    let mut imax = 0;
    for (i, v) in y.iter().enumerate() {
        if v.abs() > y[imax].abs() {
            imax = i;
        }
    }
    if y[imax] < 0.0 {
        for v in &mut y {
            *v = -*v;
        }
    }
    y
}

/// Solves (T - lambda I) x = rhs by tridiagonal LU with partial pivoting.
/// The second superdiagonal fill-in is kept in `e`.
fn solve_shifted(diag: &[f64], off: &[f64], lambda: f64, rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut b: Vec<f64> = diag.iter().map(|d| d - lambda).collect();
    let mut c: Vec<f64> = off.to_vec(); // superdiagonal
    let a: Vec<f64> = off.to_vec(); // subdiagonal
    let mut e = vec![0.0; m.saturating_sub(2)];
    let mut r = rhs.to_vec();

    let scale: f64 = b
        .iter()
        .chain(c.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    // Pivot floor: near-singular shifts are the whole point of inverse
    // iteration, but the amplification has to stay comfortably below
    // overflow even after the elimination has grown the right-hand side.
    let tiny = 1e-100 * scale;

    for k in 0..m - 1 {
        if b[k].abs() >= a[k].abs() {
            if b[k].abs() < tiny {
                b[k] = if b[k] < 0.0 { -tiny } else { tiny };
            }
            let mult = a[k] / b[k];
            b[k + 1] -= mult * c[k];
            r[k + 1] -= mult * r[k];
        } else {
            // Swap rows k and k+1.
            let (bk, ck) = (b[k], c[k]);
            b[k] = a[k];
            c[k] = b[k + 1];
            let ek = if k + 2 < m { c[k + 1] } else { 0.0 };
            if k + 2 < m {
                e[k] = ek;
            }
            let mult = bk / b[k];
            b[k + 1] = ck - mult * c[k];
            if k + 2 < m {
                c[k + 1] = -mult * ek;
            }
            let (rk, rk1) = (r[k], r[k + 1]);
            r[k] = rk1;
            r[k + 1] = rk - mult * r[k];
        }
    }

    // Back substitution with on-the-fly rescaling: only the direction of the
    // solution matters, so whenever an entry grows past `big` the computed
    // suffix and the pending right-hand side are shrunk together.
    let mut x = vec![0.0; m];
    let mut rhs_scale = 1.0f64;
    let big = 1e250;
    let safe = |v: f64| {
        if v.abs() < tiny {
            if v < 0.0 {
                -tiny
            } else {
                tiny
            }
        } else {
            v
        }
    };
    let rescale = |x: &mut [f64], k: usize, rhs_scale: &mut f64| {
        let s = x[k].abs();
        if s > big {
            for v in &mut x[k..] {
                *v /= s;
            }
            *rhs_scale /= s;
        }
    };
    x[m - 1] = rhs_scale * r[m - 1] / safe(b[m - 1]);
    rescale(&mut x, m - 1, &mut rhs_scale);
    if m >= 2 {
        x[m - 2] = (rhs_scale * r[m - 2] - c[m - 2] * x[m - 1]) / safe(b[m - 2]);
        rescale(&mut x, m - 2, &mut rhs_scale);
    }
    for k in (0..m.saturating_sub(2)).rev() {
        x[k] = (rhs_scale * r[k] - c[k] * x[k + 1] - e[k] * x[k + 2]) / safe(b[k]);
        rescale(&mut x, k, &mut rhs_scale);
    }
    x
}
