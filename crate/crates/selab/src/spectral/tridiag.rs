//! Symmetric tridiagonal eigenvalue tools: Sturm counts, bisection for the
//! lowest eigenvalues, inverse iteration for residual checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below `x`, by the LDLᵀ sign count.
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0usize;
    let mut d = 1.0f64;
    for i in 0..diag.len() {
        let sq = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - sq / d;
        if d == 0.0 {
            d = 1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin bounds of the tridiagonal spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut radius = 0.0;
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i < off.len() {
            radius += off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    (lo, hi)
}

/// The k-th smallest eigenvalue (0-based) by Sturm bisection.
pub fn eigenvalue_k(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let scale = hi.abs().max(lo.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn matvec(diag: &[f64], off: &[f64], v: &[f64], out: &mut [f64]) {
    let m = diag.len();
    for i in 0..m {
        let mut acc = diag[i] * v[i];
        if i > 0 {
            acc += off[i - 1] * v[i - 1];
        }
        if i + 1 < m {
            acc += off[i] * v[i + 1];
        }
        out[i] = acc;
    }
}

/// Solve (T - shift I) x = b by the Thomas algorithm with a tiny-pivot
/// safeguard (adequate for inverse iteration).
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut piv = diag[0] - shift;
    if piv.abs() < 1e-300 {
        piv = 1e-300;
    }
    c[0] = if m > 1 { off[0] / piv } else { 0.0 };
    d[0] = b[0] / piv;
    for i in 1..m {
        let mut den = diag[i] - shift - off[i - 1] * c[i - 1];
        if den.abs() < 1e-300 {
            den = 1e-300;
        }
        if i + 1 < m {
            c[i] = off[i] / den;
        }
        d[i] = (b[i] - off[i - 1] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Eigenvector for an eigenvalue estimate, by inverse iteration from a
/// seeded random start; returns (refined eigenvalue, vector, residual).
pub fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    seed: u64,
) -> Result<(f64, Vec<f64>, f64)> {
    let m = diag.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut v);
    let (glo, ghi) = gershgorin(diag, off);
    let scale = ghi.abs().max(glo.abs()).max(1.0);
    let shift = lambda + 1e-12 * scale;
    let mut mu = lambda;
    let mut res = f64::INFINITY;
    for _ in 0..60 {
        let mut w = shifted_solve(diag, off, shift, &v);
        normalize(&mut w);
        v = w;
        let mut tv = vec![0.0; m];
        matvec(diag, off, &v, &mut tv);
        mu = dot(&v, &tv);
        res = (0..m)
            .map(|i| (tv[i] - mu * v[i]) * (tv[i] - mu * v[i]))
            .sum::<f64>()
            .sqrt();
        if res <= 1e-10 * scale {
            break;
        }
    }
    if res > 1e-8 * scale {
        return Err(Error::EigenBudgetExceeded(format!(
            "inverse iteration residual {res:.3e} at eigenvalue {mu:.6e}"
        )));
    }
    Ok((mu, v, res))
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt().max(1e-300);
    v.iter_mut().for_each(|x| *x /= n);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
