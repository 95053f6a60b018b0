//! Riesz potentials and the integral formulation u = h − I_μ(u^τ):
//! kernel application, damped antitone Picard solver, Kelvin transform,
//! moving-plane reflection identities and HLS/Stein–Weiss exponent
//! bookkeeping.


use serde::Serialize;

use crate::core_model::{unit_ball_volume, GridField, Mask};
use crate::{Error, Result};

/// Riesz kernel |x−y|^{μ−n} with the midpoint-plus-exact-self-cell
/// quadrature rule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RieszKernelSpec {
    pub n: usize,
    pub mu: f64,
}

impl RieszKernelSpec {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(mu > 0.0 && mu < n as f64) {
            return Err(Error::InvalidKernel(format!("need 0 < mu < n, got mu = {mu}, n = {n}")));
        }
        Ok(RieszKernelSpec { n, mu })
    }

    /// Self-cell weight: the exact integral of |z|^{μ−n} over the ball of
    /// the same volume as one cell, divided by the cell volume.
    pub fn self_weight(&self, h: f64) -> f64 {
        let nf = self.n as f64;
        let wn = unit_ball_volume(self.n);
        let cell = h.powi(self.n as i32);
        let r_c = (cell / wn).powf(1.0 / nf);
        nf * wn * r_c.powf(self.mu) / (self.mu * cell)
    }
}

/// Kernel weights tabulated over index offsets of a grid (the kernel
/// depends on |x−y| only, so the table has one entry per offset).
struct KernelTable {
    dims: Vec<usize>,
    table: Vec<f64>,
    strides: Vec<usize>,
}

impl KernelTable {
    fn build(field: &GridField, kernel: &RieszKernelSpec) -> KernelTable {
        let d = field.dims.len();
        let tdims: Vec<usize> = field.dims.iter().map(|&m| 2 * m - 1).collect();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * tdims[a + 1];
        }
        let len: usize = tdims.iter().product();
        let mut table = vec![0.0; len];
        let expo = kernel.mu - kernel.n as f64;
        let self_w = kernel.self_weight(field.h);
        let mut idx = vec![0usize; d];
        for (flat, slot) in table.iter_mut().enumerate() {
            let mut rem = flat;
            for a in 0..d {
                idx[a] = rem / strides[a];
                rem %= strides[a];
            }
            let mut dist2 = 0.0f64;
            for a in 0..d {
                let off = idx[a] as isize - (field.dims[a] as isize - 1);
                let dx = off as f64 * field.h;
                dist2 += dx * dx;
            }
            *slot = if dist2 == 0.0 { self_w } else { dist2.sqrt().powf(expo) };
        }
        KernelTable { dims: field.dims.clone(), table, strides }
    }

    #[inline]
    fn weight(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut flat = 0usize;
        for k in 0..a.len() {
            let off = (a[k] + self.dims[k] - 1) - b[k];
            flat += off * self.strides[k];
        }
        self.table[flat]
    }
}

/// Discrete Riesz potential (I_μ f)(x) = Σ_y |x−y|^{μ−n} f(y) hⁿ with the
/// exact equal-volume-ball self-cell weight.
pub fn riesz_apply(f: &GridField, kernel: &RieszKernelSpec) -> Result<GridField> {
    if f.dims.len() != kernel.n {
        return Err(Error::InvalidKernel(format!(
            "kernel dimension {} does not match the {}-d grid",
            kernel.n,
            f.dims.len()
        )));
    }
    let table = KernelTable::build(f, kernel);
    let cell = f.h.powi(kernel.n as i32);
    let len = f.len();
    let indices: Vec<Vec<usize>> = (0..len).map(|i| f.multi_index(i)).collect();
    let mut out = f.clone();
    for i in 0..len {
        let mut acc = 0.0;
        for j in 0..len {
            acc += table.weight(&indices[i], &indices[j]) * f.values[j];
        }
        out.values[i] = acc * cell;
    }
    Ok(out)
}

/// Options for the damped Picard iteration of the integral equation.
#[derive(Debug, Clone, Copy)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub omega: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-10, max_iters: 500, omega: 0.5 }
    }
}

/// Solve u = h − I_μ(u^τ) on the truncated grid (contributions outside the
/// box are dropped; see the doubling diagnostic in the tests). The map is
/// antitone for τ < 0, iterated with damping from u₀ = h; the solution
/// satisfies 0 < u ≤ h.
pub fn solve_integral_equation(
    h: &GridField,
    tau: f64,
    kernel: &RieszKernelSpec,
    options: &PicardOptions,
) -> Result<GridField> {
    solve_weighted(h, tau, kernel, 0.0, options)
}

/// Weighted variant u = h − I_μ(|y|^{−α} u^τ), the Kelvin-transformed form
/// of the equation; α = 0 recovers the plain equation.
pub fn solve_weighted_integral_equation(
    h: &GridField,
    tau: f64,
    kernel: &RieszKernelSpec,
    alpha: f64,
    options: &PicardOptions,
) -> Result<GridField> {
    solve_weighted(h, tau, kernel, alpha, options)
}

fn solve_weighted(
    h: &GridField,
    tau: f64,
    kernel: &RieszKernelSpec,
    alpha: f64,
    options: &PicardOptions,
) -> Result<GridField> {
    if tau >= 0.0 {
        return Err(Error::UnsupportedExponent(tau));
    }
    if h.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NonpositiveField("data h must be positive".into()));
    }
    let weight = node_weights(h, alpha)?;
    let table = KernelTable::build(h, kernel);
    let cell = h.h.powi(kernel.n as i32);
    let len = h.len();
    let indices: Vec<Vec<usize>> = (0..len).map(|i| h.multi_index(i)).collect();
    let apply = |density: &[f64], out: &mut [f64]| {
        for i in 0..len {
            let mut acc = 0.0;
            for j in 0..len {
                acc += table.weight(&indices[i], &indices[j]) * density[j];
            }
            out[i] = acc * cell;
        }
    };

    let mut u = h.values.clone();
    let mut density = vec![0.0; len];
    let mut pot = vec![0.0; len];
    let mut omega = options.omega.clamp(1e-6, 1.0);
    let mut prev_res = f64::INFINITY;
    for _ in 0..options.max_iters.max(1) {
        for j in 0..len {
            density[j] = weight[j] * u[j].powf(tau);
        }
        apply(&density, &mut pot);
        let mut res = 0.0f64;
        for i in 0..len {
            res = res.max((h.values[i] - pot[i] - u[i]).abs());
        }
        if res < options.tol {
            let mut out = h.clone();
            out.values = u;
            return Ok(out);
        }
        if res > prev_res {
            omega *= 0.5; // oscillation: the antitone map overshoots
        }
        prev_res = res;
        // damped update with a positivity backtrack
        let mut w = omega;
        loop {
            let ok = (0..len).all(|i| (1.0 - w) * u[i] + w * (h.values[i] - pot[i]) > 0.0);
            if ok {
                break;
            }
            w *= 0.5;
            if w < 1e-6 {
                return Err(Error::NoPositiveSolution);
            }
        }
        for i in 0..len {
            u[i] = ((1.0 - w) * u[i] + w * (h.values[i] - pot[i])).min(h.values[i]);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "Picard residual {prev_res:.3e} after {} iterations (tol {})",
        options.max_iters, options.tol
    )))
}

fn node_weights(h: &GridField, alpha: f64) -> Result<Vec<f64>> {
    let mut weight = vec![1.0; h.len()];
    if alpha != 0.0 {
        for (i, w) in weight.iter_mut().enumerate() {
            let x = h.coord(i);
            let r = x.iter().map(|&c| c * c).sum::<f64>().sqrt();
            if r == 0.0 {
                return Err(Error::OutOfDomain(
                    "weighted equation has a node at the origin".into(),
                ));
            }
            *w = r.powf(-alpha);
        }
    }
    Ok(weight)
}

/// Kelvin-type transform v(x) = |x|^{μ−n} u(x/|x|²), evaluated on the same
/// grid. Nodes whose inversion target leaves the sampled box (or that sit
/// at the origin) are marked Exterior in the output; if no node survives,
/// the transform is out of domain.
pub fn kelvin_transform(u: &GridField, mu: f64) -> Result<GridField> {
    let n = u.dims.len();
    if !(mu > 0.0 && mu < n as f64) {
        return Err(Error::InvalidKernel(format!("need 0 < mu < n, got mu = {mu}")));
    }
    let expo = mu - n as f64;
    // cubic interpolation needs one cell of margin inside the box
    let lo: Vec<f64> = u.origin.iter().map(|&o| o + u.h).collect();
    let hi: Vec<f64> = (0..n)
        .map(|a| u.origin[a] + (u.dims[a] as f64 - 2.0) * u.h)
        .collect();
    let mut out = u.clone();
    let mut alive = 0usize;
    // a target is usable only if the full cubic stencil around it carries
    // sampled (non-Exterior) data
    let stencil_sampled = |t: &[f64]| -> bool {
        let mut base = vec![0usize; n];
        for a in 0..n {
            let i = ((t[a] - u.origin[a]) / u.h).floor() as isize;
            let i = i.clamp(1, u.dims[a] as isize - 3);
            base[a] = i as usize;
        }
        let mut idx = vec![0usize; n];
        let mut stack = vec![0usize; n];
        loop {
            for a in 0..n {
                idx[a] = base[a] - 1 + stack[a];
            }
            if u.mask[u.flat(&idx)] == Mask::Exterior {
                return false;
            }
            let mut a = n;
            loop {
                if a == 0 {
                    return true;
                }
                a -= 1;
                stack[a] += 1;
                if stack[a] < 4 {
                    break;
                }
                stack[a] = 0;
            }
        }
    };
    for i in 0..u.len() {
        let x = u.coord(i);
        let r2: f64 = x.iter().map(|&c| c * c).sum();
        let target: Option<Vec<f64>> = if r2 > 0.0 {
            let t: Vec<f64> = x.iter().map(|&c| c / r2).collect();
            if (0..n).all(|a| t[a] >= lo[a] && t[a] <= hi[a]) && stencil_sampled(&t) {
                Some(t)
            } else {
                None
            }
        } else {
            None
        };
        match target {
            Some(t) => {
                out.values[i] = r2.sqrt().powf(expo) * u.interp_cubic(&t)?;
                out.mask[i] = u.mask[i];
                alive += 1;
            }
            None => {
                out.values[i] = 0.0;
                out.mask[i] = Mask::Exterior;
            }
        }
    }
    if alive == 0 {
        return Err(Error::OutOfDomain(
            "no grid node has its inversion target inside the sampled box".into(),
        ));
    }
    Ok(out)
}

/// Reflection hyperplane {x_axis = lambda}.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionPlane {
    pub axis: usize,
    pub lambda: f64,
}

/// Index of the reflected node along the plane axis, when the plane is
/// grid-aligned (2(λ−origin)/h integral).
fn reflected_index(field: &GridField, plane: &ReflectionPlane) -> Result<isize> {
    let a = plane.axis;
    if a >= field.dims.len() {
        return Err(Error::InvalidRange(format!("axis {a} out of range")));
    }
    let k2 = 2.0 * (plane.lambda - field.origin[a]) / field.h;
    let k = k2.round();
    if (k2 - k).abs() > 1e-9 {
        return Err(Error::OutOfDomain(format!(
            "plane at {} is not aligned to the half-grid",
            plane.lambda
        )));
    }
    Ok(k as isize)
}

/// Verify the moving-plane difference identity for a solution of the
/// integral equation: for x in the half-space beyond the plane,
/// u_λ(x) − u(x) = [h_λ(x) − h(x)] − Σ_{y∈Σ_λ}(K(x^λ,y) − K(x,y))·
/// (w(y)u(y)^τ − w(y^λ)u_λ(y)^τ) − (asymmetric leftover), with w ≡ 1 in
/// the plain form and w(y) = |y|^{−α(n,μ,τ)} in the weighted (Kelvin)
/// form. Returns the maximum defect over the half-space sample.
pub fn reflection_difference_check(
    u: &GridField,
    h: &GridField,
    plane: &ReflectionPlane,
    tau: f64,
    kernel: &RieszKernelSpec,
    weighted: bool,
) -> Result<f64> {
    let axis = plane.axis;
    let k0 = reflected_index(u, plane)?;
    let d = u.dims[axis] as isize;
    if k0 <= 0 || k0 >= 2 * (d - 1) {
        return Err(Error::OutOfDomain(format!(
            "plane at {} leaves no reflected overlap",
            plane.lambda
        )));
    }
    let alpha = if weighted { alpha_weight(kernel.n, kernel.mu, tau)? } else { 0.0 };
    let weight = node_weights(u, alpha)?;
    let table = KernelTable::build(u, kernel);
    let cell = u.h.powi(kernel.n as i32);
    let len = u.len();
    let indices: Vec<Vec<usize>> = (0..len).map(|i| u.multi_index(i)).collect();
    let reflect = |idx: &[usize]| -> Option<Vec<usize>> {
        let j = k0 - idx[axis] as isize;
        if j < 0 || j >= d {
            return None;
        }
        let mut out = idx.to_vec();
        out[axis] = j as usize;
        Some(out)
    };
    // Σ_λ: nodes strictly beyond the plane with a reflected partner
    let sigma: Vec<usize> = (0..len)
        .filter(|&i| {
            2 * indices[i][axis] as isize > k0 && reflect(&indices[i]).is_some()
        })
        .collect();
    if sigma.is_empty() {
        return Err(Error::OutOfDomain("empty reflected overlap".into()));
    }
    // leftover: nodes with no reflected partner (asymmetric part of the box)
    let leftover: Vec<usize> =
        (0..len).filter(|&i| reflect(&indices[i]).is_none()).collect();

    let mut defect = 0.0f64;
    for &i in &sigma {
        let xi = &indices[i];
        let xr = reflect(xi).unwrap();
        let ir = u.flat(&xr);
        let lhs = u.values[ir] - u.values[i];
        let mut rhs = h.values[ir] - h.values[i];
        for &j in &sigma {
            let yj = &indices[j];
            let yr = reflect(yj).unwrap();
            let jr = u.flat(&yr);
            let dk = table.weight(&xr, yj) - table.weight(xi, yj);
            let dc = weight[j] * u.values[j].powf(tau) - weight[jr] * u.values[jr].powf(tau);
            rhs -= dk * dc * cell;
        }
        for &j in &leftover {
            let dk = table.weight(&xr, &indices[j]) - table.weight(xi, &indices[j]);
            rhs -= dk * weight[j] * u.values[j].powf(tau) * cell;
        }
        defect = defect.max((lhs - rhs).abs());
    }
    Ok(defect)
}

/// Sup over the reflected overlap of |u − u∘reflection|. Node-aligned
/// planes compare grid values exactly; half-cell-aligned planes too (the
/// reflection permutes nodes either way).
pub fn symmetry_defect(u: &GridField, plane: &ReflectionPlane) -> Result<f64> {
    let k0 = reflected_index(u, plane)?;
    let axis = plane.axis;
    let d = u.dims[axis] as isize;
    if k0 <= 0 || k0 >= 2 * (d - 1) {
        return Err(Error::OutOfDomain("empty reflected overlap".into()));
    }
    let mut defect = 0.0f64;
    let mut seen = false;
    for i in 0..u.len() {
        if u.mask[i] == Mask::Exterior {
            continue;
        }
        let mut idx = u.multi_index(i);
        let j = k0 - idx[axis] as isize;
        if j < 0 || j >= d {
            continue;
        }
        idx[axis] = j as usize;
        let ir = u.flat(&idx);
        if u.mask[ir] == Mask::Exterior {
            continue;
        }
        seen = true;
        defect = defect.max((u.values[i] - u.values[ir]).abs());
    }
    if !seen {
        return Err(Error::OutOfDomain("empty reflected overlap".into()));
    }
    Ok(defect)
}

/// Discrete measure (count × hⁿ) of Σ_λ^− = {x beyond the plane with
/// u(x) > u_λ(x)} for each plane position in `lambdas`.
pub fn sigma_minus_measure(
    u: &GridField,
    axis: usize,
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    let cell = u.h.powi(u.dims.len() as i32);
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let plane = ReflectionPlane { axis, lambda };
        let k0 = reflected_index(u, &plane)?;
        let d = u.dims[axis] as isize;
        let mut count = 0usize;
        for i in 0..u.len() {
            if u.mask[i] == Mask::Exterior {
                continue;
            }
            let mut idx = u.multi_index(i);
            if 2 * idx[axis] as isize <= k0 {
                continue;
            }
            let j = k0 - idx[axis] as isize;
            if j < 0 || j >= d {
                continue;
            }
            idx[axis] = j as usize;
            let ir = u.flat(&idx);
            if u.mask[ir] != Mask::Exterior && u.values[i] > u.values[ir] {
                count += 1;
            }
        }
        out.push(count as f64 * cell);
    }
    Ok(out)
}

/// Exponent bookkeeping for the HLS/Stein–Weiss framework.
#[derive(Debug, Clone, Serialize)]
pub struct HLSExponents {
    pub n: usize,
    pub mu: f64,
    pub tau: f64,
    /// β = (τ−1)/(((n−μ)/n)τ − 1).
    pub beta: f64,
    /// Stein–Weiss weight exponent α = (n+μ) − (n−μ)τ.
    pub alpha: f64,
    /// Unweighted HLS order ν = n − μ.
    pub nu: f64,
    /// Example admissible pair for 1/p + ν/n = 1 + 1/q (q = 2).
    pub p: f64,
    pub q: f64,
    /// Supremum of β over τ < 0: n/(n−μ).
    pub beta_sup: f64,
    /// The symmetry theorem's threshold 2n/(n−μ).
    pub beta_threshold: f64,
    pub feasible: Feasibility,
}

/// Feasibility flags for the exponent ranges the symmetry arguments need.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Feasibility {
    /// β > 2n/(n−μ). This never holds for τ < 0, since sup β = n/(n−μ)
    /// is already below the threshold; reported honestly.
    pub beta_exceeds_threshold: bool,
    /// The example (p, q) pair satisfies 1 < p and 1 < q < ∞.
    pub hls_pair_admissible: bool,
    /// α > 0, so the weight |y|^{−α} is genuinely singular at the origin.
    pub alpha_positive: bool,
}

pub fn hls_exponents(n: usize, mu: f64, tau: f64) -> Result<HLSExponents> {
    if n == 0 || !(mu > 0.0 && mu < n as f64) {
        return Err(Error::InvalidKernel(format!("need 0 < mu < n, got mu = {mu}, n = {n}")));
    }
    if tau >= 0.0 {
        return Err(Error::InvalidKernel(format!("need tau < 0, got {tau}")));
    }
    let nf = n as f64;
    let ratio = (nf - mu) / nf;
    let beta = (tau - 1.0) / (ratio * tau - 1.0);
    let alpha = (nf + mu) - (nf - mu) * tau;
    let nu = nf - mu;
    let q = 2.0;
    let p = 1.0 / (1.0 + 1.0 / q - nu / nf);
    Ok(HLSExponents {
        n,
        mu,
        tau,
        beta,
        alpha,
        nu,
        p,
        q,
        beta_sup: nf / (nf - mu),
        beta_threshold: 2.0 * nf / (nf - mu),
        feasible: Feasibility {
            beta_exceeds_threshold: beta > 2.0 * nf / (nf - mu),
            hls_pair_admissible: p > 1.0 && q > 1.0,
            alpha_positive: alpha > 0.0,
        },
    })
}

/// Stein–Weiss weight exponent α = (n+μ) − (n−μ)τ.
pub fn alpha_weight(n: usize, mu: f64, tau: f64) -> Result<f64> {
    Ok(hls_exponents(n, mu, tau)?.alpha)
}
