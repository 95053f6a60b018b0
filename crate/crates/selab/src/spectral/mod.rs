//! Linearized stability analysis: radial-mode reduction of the operator
//! −Δ + τu^{τ−1}, eigenvalue counts, Morse index reports, Euler-type test
//! functions and the Hardy stability oracle.

mod tridiag;
#[cfg(test)]
mod tests;

use serde::Serialize;

use crate::core_model::{Domain, ProblemSpec, RadialFn, RadialProfile};
use crate::radial::euler_ode_zeros;
use crate::{Error, Result};

/// Radial reduction of −Δ + W(r) at a fixed angular mode ℓ on a ball or
/// annulus, discretized by a finite-volume scheme on staggered nodes (the
/// first ball node sits at r = h/2, so inverse-square potentials are never
/// evaluated at the origin). Stored in the symmetrized tridiagonal form
/// obtained from the similarity with the weight r^{n−1}·(cell width).
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub n: usize,
    pub ell: usize,
    /// Node radii (cell midpoints).
    pub r: Vec<f64>,
    /// Quadrature weights r_j^{n−1}·w_j of the weighted inner product.
    pub weights: Vec<f64>,
    /// Worst weighted-symmetry defect of the raw finite-volume operator,
    /// relative to the operator scale.
    pub asymmetry: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl LinearizedOperator {
    /// Assemble −(1/r^{n−1})(r^{n−1}φ′)′ + W(r)φ on (r_lo, r_hi) with a
    /// Dirichlet condition at r_hi and, when `left_dirichlet`, also at
    /// r_lo (otherwise the natural regularity condition of a ball center).
    /// `graded` selects a geometric mesh, appropriate for wide annuli.
    pub fn from_potential<F: Fn(f64) -> f64>(
        n: usize,
        r_lo: f64,
        r_hi: f64,
        left_dirichlet: bool,
        graded: bool,
        cells: usize,
        potential: F,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(r_hi > r_lo) || r_lo < 0.0 {
            return Err(Error::InvalidRange(format!(
                "operator interval [{r_lo}, {r_hi}]"
            )));
        }
        if cells < 2 {
            return Err(Error::InvalidRange(format!("cells = {cells} < 2")));
        }
        if graded && r_lo <= 0.0 {
            return Err(Error::InvalidRange(
                "geometric mesh requires r_lo > 0".into(),
            ));
        }
        let m = cells;
        // interfaces s_0..s_m, nodes at cell midpoints
        let s: Vec<f64> = if graded {
            let ratio = r_hi / r_lo;
            (0..=m)
                .map(|j| r_lo * ratio.powf(j as f64 / m as f64))
                .collect()
        } else {
            let h = (r_hi - r_lo) / m as f64;
            (0..=m).map(|j| r_lo + h * j as f64).collect()
        };
        let r: Vec<f64> = (0..m).map(|j| 0.5 * (s[j] + s[j + 1])).collect();
        let weights: Vec<f64> = (0..m)
            .map(|j| r[j].powi(n as i32 - 1) * (s[j + 1] - s[j]))
            .collect();

        // interface conductances c_j = s_j^{n-1} / (node distance)
        let mut c = vec![0.0; m + 1];
        for j in 1..m {
            c[j] = s[j].powi(n as i32 - 1) / (r[j] - r[j - 1]);
        }
        if left_dirichlet {
            c[0] = s[0].powi(n as i32 - 1) / (r[0] - s[0]);
        }
        c[m] = s[m].powi(n as i32 - 1) / (s[m] - r[m - 1]);

        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m - 1];
        let mut asym = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..m {
            diag[j] = (c[j] + c[j + 1]) / weights[j] + potential(r[j]);
            scale = scale.max(diag[j].abs());
        }
        for j in 0..m - 1 {
            // raw coefficients of the finite-volume operator; weighted
            // symmetry m_j A_{j,j+1} = m_{j+1} A_{j+1,j} holds by
            // construction and is measured here
            let upper = -c[j + 1] / weights[j];
            let lower = -c[j + 1] / weights[j + 1];
            asym = asym.max((weights[j] * upper - weights[j + 1] * lower).abs());
            off[j] = -c[j + 1] / (weights[j] * weights[j + 1]).sqrt();
            scale = scale.max(c[j + 1]);
        }
        let asymmetry = asym / scale.max(1e-300);
        Ok(LinearizedOperator { n, ell: 0, r, weights, asymmetry, diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Apply the symmetrized operator.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        tridiag::matvec(&self.diag, &self.off, v, out);
    }

    /// Number of eigenvalues strictly below `x` (exact Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        tridiag::count_below(&self.diag, &self.off, x)
    }

    /// Crude operator-norm estimate from Gershgorin disks.
    pub fn norm_estimate(&self) -> f64 {
        let (lo, hi) = tridiag::gershgorin(&self.diag, &self.off);
        lo.abs().max(hi.abs())
    }

    /// k-th smallest eigenvalue (0-based), by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        tridiag::eigenvalue_k(&self.diag, &self.off, k)
    }

    /// Eigenpair with a verified residual ‖Av − λv‖ ≤ 1e−8·scale.
    pub fn eigenpair(&self, k: usize) -> Result<(f64, Vec<f64>)> {
        let lambda = self.eigenvalue(k);
        let (mu, v, _res) =
            tridiag::inverse_iteration(&self.diag, &self.off, lambda, eigen_seed().wrapping_add(k as u64))?;
        Ok((mu, v))
    }
}

fn eigen_seed() -> u64 {
    std::env::var("SELAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5e1a_b001)
}

/// Default grading rule: geometric meshes for annuli, uniform for balls.
fn domain_interval(domain: &Domain) -> Result<(f64, f64, bool, bool)> {
    match domain {
        Domain::Ball { radius } => Ok((0.0, *radius, false, false)),
        Domain::Annulus { inner, outer } => Ok((*inner, *outer, true, true)),
        Domain::Box { .. } => Err(Error::InvalidSpec(
            "radial linearization requires a ball or annulus".into(),
        )),
    }
}

/// Discrete −Δ + τu^{τ−1} at angular mode ℓ around the positive base
/// solution `u`, with homogeneous Dirichlet boundary. The mode adds the
/// centrifugal term ℓ(ℓ+n−2)/r² to the potential.
pub fn assemble_linearized(
    u: &dyn RadialFn,
    spec: &ProblemSpec,
    ell: usize,
    cells: usize,
) -> Result<LinearizedOperator> {
    let (r_lo, r_hi, left_dirichlet, graded) = domain_interval(&spec.domain)?;
    let n = spec.n;
    let cent = (ell * (ell + n - 2)) as f64;
    // probe positivity at the nodes before assembling
    let probe = LinearizedOperator::from_potential(
        n, r_lo, r_hi, left_dirichlet, graded, cells, |_| 0.0,
    )?;
    for &rj in &probe.r {
        if !(u.value(rj) > 0.0) {
            return Err(Error::NonpositiveField(format!(
                "base solution u({rj}) = {} not positive",
                u.value(rj)
            )));
        }
    }
    let source = spec.source.clone();
    let mut op = LinearizedOperator::from_potential(
        n,
        r_lo,
        r_hi,
        left_dirichlet,
        graded,
        cells,
        |r| {
            source.deriv(u.value(r)).unwrap_or(0.0) + cent / (r * r)
        },
    )?;
    op.ell = ell;
    Ok(op)
}

/// The k smallest eigenvalues, ascending, each verified against the
/// residual bound by inverse iteration (deterministic for a fixed
/// `SELAB_SEED`).
pub fn lowest_eigenvalues(op: &LinearizedOperator, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > op.dim() {
        return Err(Error::InvalidRange(format!(
            "requested {k} eigenvalues of a dimension-{} operator",
            op.dim()
        )));
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let (lambda, _v) = op.eigenpair(i)?;
        out.push(lambda);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Dimension of the degree-ℓ spherical harmonics on S^{n−1}.
pub fn spherical_harmonic_multiplicity(n: usize, ell: usize) -> usize {
    fn binom(a: usize, b: usize) -> usize {
        if b > a {
            return 0;
        }
        let mut acc = 1usize;
        for i in 0..b.min(a - b) {
            acc = acc * (a - i) / (i + 1);
        }
        acc
    }
    if ell == 0 {
        return 1;
    }
    if n < 2 {
        return 0;
    }
    let lead = binom(n + ell - 1, ell);
    let sub = if ell >= 2 { binom(n + ell - 3, ell - 2) } else { 0 };
    lead - sub
}

/// Morse-index report of a radial base solution on the domain of `spec`
/// with outer radius `big_r`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    #[serde(rename = "R")]
    pub r: f64,
    /// Negative eigenvalues, ascending, repeated with the spherical
    /// multiplicity of their angular mode.
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub tol_neg: f64,
    /// Angular modes actually solved before the centrifugal truncation.
    pub modes: usize,
    pub grid: usize,
}

/// Count negative eigenvalues of the linearization around `u` on the
/// domain of `spec` rescaled to outer radius `big_r`, summing angular
/// modes with spherical-harmonic multiplicity. `modes` caps the number of
/// modes; the mode loop stops earlier once the centrifugal term dominates
/// the negative part of the potential (higher modes are then provably
/// nonnegative). `tol_neg` overrides the default threshold
/// 1e−9·(operator-norm estimate) below which eigenvalues count as negative.
pub fn morse_index(
    u: &dyn RadialFn,
    spec: &ProblemSpec,
    big_r: f64,
    modes: usize,
    cells: usize,
    tol_neg: Option<f64>,
) -> Result<SpectrumReport> {
    if big_r <= 0.0 {
        return Err(Error::InvalidRange(format!("R = {big_r}")));
    }
    let mut scoped = spec.clone();
    scoped.domain = match &spec.domain {
        Domain::Ball { .. } => Domain::Ball { radius: big_r },
        Domain::Annulus { inner, .. } => {
            if big_r <= *inner {
                return Err(Error::InvalidRange(format!(
                    "R = {big_r} inside the annulus inner radius {inner}"
                )));
            }
            Domain::Annulus { inner: *inner, outer: big_r }
        }
        Domain::Box { .. } => {
            return Err(Error::InvalidSpec(
                "morse_index requires a ball or annulus".into(),
            ))
        }
    };

    let base = assemble_linearized(u, &scoped, 0, cells)?;
    let tol = tol_neg.unwrap_or(1e-9 * base.norm_estimate());
    // largest negative-part strength sup_r (−W(r)·r²) of the mode-0
    // potential; modes with ℓ(ℓ+n−2) at or above it are nonnegative
    let mut neg_strength = 0.0f64;
    for &rj in &base.r {
        let w = scoped.source.deriv(u.value(rj)).unwrap_or(0.0);
        neg_strength = neg_strength.max(-w * rj * rj);
    }

    let mut eigenvalues = Vec::new();
    let mut index = 0usize;
    let mut modes_used = 0usize;
    for ell in 0..modes {
        if ell >= 1 && (ell * (ell + spec.n - 2)) as f64 >= neg_strength * (1.0 - 1e-10) {
            break;
        }
        let op = if ell == 0 {
            base.clone()
        } else {
            assemble_linearized(u, &scoped, ell, cells)?
        };
        let count = op.count_below(-tol);
        let mult = spherical_harmonic_multiplicity(spec.n, ell);
        for k in 0..count {
            let lambda = op.eigenvalue(k);
            for _ in 0..mult {
                eigenvalues.push(lambda);
            }
        }
        index += count * mult;
        modes_used = ell + 1;
    }
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    Ok(SpectrumReport {
        r: big_r,
        eigenvalues,
        morse_index: index,
        tol_neg: tol,
        modes: modes_used,
        grid: cells,
    })
}

/// One Euler-type test function h_i = sin(√μ·log(r/r₀)) between two
/// consecutive zeros, with its quadratic-form value computed both from the
/// gradient form and from the potential form of the energy.
#[derive(Debug, Clone)]
pub struct EulerTestFunction {
    pub mu: f64,
    pub r0: f64,
    /// Supporting annulus (consecutive zeros of the Euler solution).
    pub r_lo: f64,
    pub r_hi: f64,
    /// Q(h) = ∫(|∇h|² − p·u^{−p−1}h²), planar measure.
    pub q: f64,
    /// Same value through ∫(μ/r² − p·u^{−p−1})h².
    pub q_potential_form: f64,
    /// ∫ h², planar measure.
    pub norm_sq: f64,
}

impl EulerTestFunction {
    pub fn value(&self, r: f64) -> f64 {
        if r <= self.r_lo || r >= self.r_hi {
            return 0.0;
        }
        (self.mu.sqrt() * (r / self.r0).ln()).sin()
    }
}

/// Build `count` disjointly supported test functions from the zeros of the
/// Euler equation k″ + k′/r + μk/r² = 0 starting at the inner radius of
/// `profile`, and evaluate Q(h_i) = ∫(|∇h_i|² − p·u^{−p−1}h_i²) over the
/// plane (n = 2 measure 2πr dr). Negative values certify Morse-index units.
pub fn euler_test_functions(
    mu: f64,
    profile: &RadialProfile,
    p: f64,
    count: usize,
) -> Result<Vec<EulerTestFunction>> {
    if mu <= 0.0 {
        return Err(Error::NonOscillatory(mu));
    }
    if p <= 0.0 {
        return Err(Error::UnsupportedExponent(-p));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let r0 = profile.r[0];
    if r0 <= 0.0 {
        return Err(Error::LogSingularity);
    }
    let zeros = euler_ode_zeros(mu, r0, count)?;
    if *zeros.last().unwrap() > profile.r_max() * (1.0 + 1e-12) {
        return Err(Error::InvalidRange(format!(
            "zero {} beyond the sampled range {}",
            zeros.last().unwrap(),
            profile.r_max()
        )));
    }
    let sq = mu.sqrt();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Vec::with_capacity(count);
    let mut lo = r0;
    for &hi in &zeros {
        // composite Simpson in t = log r; all three integrals share nodes
        let steps = 2000usize;
        let (t0, t1) = (lo.ln(), hi.ln());
        let ht = (t1 - t0) / steps as f64;
        let mut q = 0.0;
        let mut q_pot = 0.0;
        let mut norm = 0.0;
        for j in 0..=steps {
            let w = if j == 0 || j == steps {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let t = t0 + ht * j as f64;
            let r = t.exp();
            let phase = sq * (r / r0).ln();
            let h = phase.sin();
            let dh = sq * phase.cos() / r;
            let uval = profile.value_at(r)?;
            if uval <= 0.0 {
                return Err(Error::NonpositiveField(format!("u({r}) = {uval}")));
            }
            let pot = p * uval.powf(-p - 1.0);
            // dr = r dt; planar measure 2π r dr = 2π r² dt
            let meas = two_pi * r * r * w;
            q += (dh * dh - pot * h * h) * meas;
            q_pot += (mu / (r * r) - pot) * h * h * meas;
            norm += h * h * meas;
        }
        let scale = ht / 3.0;
        out.push(EulerTestFunction {
            mu,
            r0,
            r_lo: lo,
            r_hi: hi,
            q: q * scale,
            q_potential_form: q_pot * scale,
            norm_sq: norm * scale,
        });
        lo = hi;
    }
    Ok(out)
}

/// Hardy comparison for the singular solution: its linearized potential is
/// exactly −pβ(β+n−2)/r², so stability on large balls reduces to the Hardy
/// constant (n−2)²/4.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardyCheck {
    /// pβ(β+n−2), the inverse-square strength of the potential.
    pub lhs: f64,
    /// Hardy constant (n−2)²/4.
    pub rhs: f64,
    pub stable: bool,
}

pub fn hardy_stability_check(n: usize, tau: f64) -> HardyCheck {
    let p = -tau;
    let beta = 2.0 / (1.0 + p);
    let lhs = p * beta * (beta + n as f64 - 2.0);
    let rhs = (n as f64 - 2.0) * (n as f64 - 2.0) / 4.0;
    HardyCheck { lhs, rhs, stable: lhs <= rhs }
}

/// Dirichlet energy of the planar log cutoff between R and R²:
/// ∫|∇ξ|² = 2π/log R.
pub fn log_cutoff_capacity(big_r: f64) -> Result<f64> {
    if big_r <= 1.0 {
        return Err(Error::InvalidRange(format!("log cutoff requires R > 1, got {big_r}")));
    }
    Ok(2.0 * std::f64::consts::PI / big_r.ln())
}
