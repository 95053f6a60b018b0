//! Iterative linear solves for the discretised operators.

use super::FdDomain;
use crate::core_model::{Boundary, GridField};
use crate::{Error, Result};

/// Solve A x = b with Jacobi-preconditioned BiCGStab, where A is applied by
/// `apply`. BiCGStab handles the mildly nonsymmetric cut-arm stencils and
/// reduces to a CG-like iteration on symmetric systems. Deterministic:
/// the shadow vector is the initial residual.
pub(crate) fn bicgstab<F>(
    apply: F,
    diag: &[f64],
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let m = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; m]);
    let bnorm = norm2(b).max(1e-300);
    let mut ax = vec![0.0; m];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    if norm2(&r) <= rel_tol * bnorm {
        return Ok(x);
    }
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; m];
    let mut p = vec![0.0; m];
    let mut restarts = 0usize;
    let mut it = 0usize;
    let mut r0_cur = r0;
    while it < max_iters {
        it += 1;
        let rho_new = dot(&r0_cur, &r);
        if rho_new.abs() < 1e-300 {
            // breakdown: restart with the current residual as shadow
            restarts += 1;
            if restarts > 10 {
                return Err(Error::LinearSolveFailed(format!(
                    "BiCGStab breakdown after {it} iterations"
                )));
            }
            r0_cur = r.clone();
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|z| *z = 0.0);
            p.iter_mut().for_each(|z| *z = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..m {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = jacobi(diag, &p);
        apply(&phat, &mut v);
        let denom = dot(&r0_cur, &v);
        if denom.abs() < 1e-300 {
            restarts += 1;
            if restarts > 10 {
                return Err(Error::LinearSolveFailed(format!(
                    "BiCGStab stagnation after {it} iterations"
                )));
            }
            r0_cur = r.clone();
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            continue;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(&ri, &vi)| ri - alpha * vi).collect();
        if norm2(&s) <= rel_tol * bnorm {
            for i in 0..m {
                x[i] += alpha * phat[i];
            }
            return Ok(x);
        }
        let shat = jacobi(diag, &s);
        let mut t = vec![0.0; m];
        apply(&shat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        if omega.abs() < 1e-300 {
            omega = 1.0;
        }
        for i in 0..m {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm2(&r) <= rel_tol * bnorm {
            return Ok(x);
        }
    }
    // final direct check before giving up
    apply(&x, &mut ax);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(&bi, &ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt();
    if res <= rel_tol * bnorm {
        Ok(x)
    } else {
        Err(Error::LinearSolveFailed(format!(
            "relative residual {:.3e} > {rel_tol:.3e} after {max_iters} iterations",
            res / bnorm
        )))
    }
}

fn jacobi(diag: &[f64], v: &[f64]) -> Vec<f64> {
    v.iter().zip(diag).map(|(&vi, &d)| vi / d).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Interior unknowns solving (-Δ_h) u = rhs with the given Dirichlet data
/// folded into the right-hand side.
pub(crate) fn solve_neg_laplacian(
    dom: &FdDomain,
    rhs: &[f64],
    bvals: &[f64],
    x0: Option<&[f64]>,
    linear_tol: f64,
) -> Result<Vec<f64>> {
    let brhs = dom.boundary_rhs(bvals);
    let b: Vec<f64> = rhs.iter().zip(&brhs).map(|(&f, &g)| f + g).collect();
    let m = b.len();
    let budget = (40 * m).max(20_000);
    bicgstab(
        |u, out| dom.matvec(u, None, out),
        &dom.diagonal(None),
        &b,
        x0,
        linear_tol,
        budget,
    )
}

/// Solve the linear Dirichlet problem Δu = rhs on the domain grid.
/// `rhs` holds one value per interior node (unknown order); the result is a
/// full masked field carrying the boundary data.
pub fn solve_linear_poisson(
    dom: &FdDomain,
    rhs: &[f64],
    boundary: &Boundary,
    linear_tol: f64,
) -> Result<GridField> {
    if rhs.len() != dom.interior_len() {
        return Err(Error::InvalidSpec(format!(
            "rhs has {} entries, expected {}",
            rhs.len(),
            dom.interior_len()
        )));
    }
    if linear_tol <= 0.0 {
        return Err(Error::InvalidSpec("linear_tol must be > 0".into()));
    }
    let bvals = dom.boundary_values(boundary)?;
    let neg_rhs: Vec<f64> = rhs.iter().map(|&v| -v).collect();
    let u = solve_neg_laplacian(dom, &neg_rhs, &bvals, None, linear_tol)?;
    dom.to_field(&u, boundary)
}
