//! Shared problem types, closed-form solution families, residual evaluators,
//! scaling transforms, and scalar threshold formulas.

mod closed_form;
mod grid;
mod profile;
mod spec;

pub use closed_form::{
    printed_amplitude, quadratic_solution, singular_amplitude, singular_solution,
    ClosedFormSolution,
};
pub use grid::{GridField, Mask};
pub use profile::RadialProfile;
pub use spec::{Boundary, Domain, ProblemSpec, Source};

use crate::{Error, Result};

/// Volume of the unit ball in `R^n`.
///
/// Computed by the recurrence ω_n = 2π ω_{n−2}/n, exact for integer n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI * unit_ball_volume(n - 2) / n as f64,
    }
}

/// Positive radial function with a first derivative, the common currency of
/// the audit and spectral modules. Closed forms evaluate analytically;
/// sampled profiles interpolate.
pub trait RadialFn {
    fn value(&self, r: f64) -> f64;
    fn deriv(&self, r: f64) -> f64;
    /// Sampled/valid radial range.
    fn r_range(&self) -> (f64, f64);
}

/// Exponent of the singular power solution, β = 2/(1−τ).
pub fn singular_exponent(tau: f64) -> f64 {
    2.0 / (1.0 - tau)
}

/// Pohozaev/Liouville coefficient (n−2)/2 + n/(1+τ) together with the
/// threshold exponent τ*(n) = −1 − 2n/(n−2).
pub fn liouville_coefficient(n: usize, tau: f64) -> Result<(f64, f64)> {
    if n <= 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if tau == -1.0 {
        return Err(Error::SingularExponent(tau));
    }
    let nf = n as f64;
    let coefficient = (nf - 2.0) / 2.0 + nf / (1.0 + tau);
    let tau_star = -1.0 - 2.0 * nf / (nf - 2.0);
    Ok((coefficient, tau_star))
}

/// Dimension threshold n*(τ) = 2 + (4/(1−τ))(−τ + √(τ²−τ)) below which no
/// stable positive entire solution exists.
pub fn stability_threshold_dim(tau: f64) -> Result<f64> {
    if tau >= 0.0 {
        return Err(Error::UnsupportedExponent(tau));
    }
    Ok(2.0 + 4.0 / (1.0 - tau) * (-tau + (tau * tau - tau).sqrt()))
}

/// Blow-up rescaling of a radial profile about the origin:
/// v(r) = λ^{−2/(1−τ)} u(λ r). Solutions map to solutions; samples map
/// exactly onto the rescaled radii so no interpolation is involved.
pub fn rescale_blowup_profile(profile: &RadialProfile, lambda: f64, tau: f64) -> Result<RadialProfile> {
    if lambda <= 0.0 {
        return Err(Error::InvalidRange(format!("lambda = {lambda} must be > 0")));
    }
    let beta = singular_exponent(tau);
    let scale = lambda.powf(-beta);
    let r: Vec<f64> = profile.r.iter().map(|&ri| ri / lambda).collect();
    let u: Vec<f64> = profile.u.iter().map(|&ui| scale * ui).collect();
    let du: Vec<f64> = profile.du.iter().map(|&di| scale * lambda * di).collect();
    RadialProfile::new(profile.n, tau, r, u, du)
}

/// Blow-up rescaling of a grid field about `x0`. The returned field lives on
/// the rescaled index-aligned grid (spacing h/λ, shifted origin), so values
/// transfer pointwise without interpolation.
pub fn rescale_blowup_grid(field: &GridField, x0: &[f64], lambda: f64, tau: f64) -> Result<GridField> {
    if lambda <= 0.0 {
        return Err(Error::InvalidRange(format!("lambda = {lambda} must be > 0")));
    }
    if x0.len() != field.dims.len() {
        return Err(Error::InvalidSpec("x0 dimension mismatch".into()));
    }
    let beta = singular_exponent(tau);
    let scale = lambda.powf(-beta);
    let origin: Vec<f64> = field
        .origin
        .iter()
        .zip(x0)
        .map(|(&o, &c)| (o - c) / lambda)
        .collect();
    Ok(GridField {
        dims: field.dims.clone(),
        h: field.h / lambda,
        origin,
        values: field.values.iter().map(|&v| scale * v).collect(),
        mask: field.mask.clone(),
    })
}

/// Pointwise residual Δu − f(u) of a radial profile, with u″ recovered from
/// the sampled derivative by fourth-order central differencing (uniform
/// sample spacing assumed; the ends fall back to one-sided second order).
pub fn pde_residual_profile(profile: &RadialProfile, source: &Source) -> Result<Vec<f64>> {
    profile.check_positive()?;
    let m = profile.r.len();
    let n = profile.n as f64;
    let mut res = vec![0.0; m];
    let h = if m > 1 { profile.r[1] - profile.r[0] } else { 1.0 };
    for i in 0..m {
        let upp = if i >= 2 && i + 2 < m {
            (-profile.du[i + 2] + 8.0 * profile.du[i + 1] - 8.0 * profile.du[i - 1]
                + profile.du[i - 2])
                / (12.0 * h)
        } else if i == 0 {
            // center: u''(0) = f(a)/n by the regular expansion
            source.eval(profile.u[0])? / n
        } else if i + 1 < m {
            (profile.du[i + 1] - profile.du[i - 1]) / (2.0 * h)
        } else {
            (3.0 * profile.du[i] - 4.0 * profile.du[i - 1] + profile.du[i - 2]) / (2.0 * h)
        };
        let first_order = if profile.r[i] == 0.0 {
            // (n-1) u'/r -> (n-1) u''(0) at the regular center
            (n - 1.0) * source.eval(profile.u[0])? / n
        } else {
            (n - 1.0) * profile.du[i] / profile.r[i]
        };
        res[i] = upp + first_order - source.eval(profile.u[i])?;
    }
    Ok(res)
}

/// Pointwise residual of a closed-form solution at radius `r`, evaluated
/// analytically.
pub fn pde_residual_closed_form(cf: &ClosedFormSolution, source: &Source, x: &[f64]) -> Result<f64> {
    let u = cf.eval(x);
    if u <= 0.0 {
        return Err(Error::NonpositiveField(format!("u({x:?}) = {u}")));
    }
    Ok(cf.laplacian(x) - source.eval(u)?)
}

/// Residual field Δ_h u − f(u) on full-stencil interior nodes of a masked
/// grid (other nodes are left at zero in the returned field).
pub fn pde_residual_grid(field: &GridField, source: &Source) -> Result<GridField> {
    let (lap, skipped) = crate::elliptic_fd::discrete_laplacian_partial(field)?;
    let mut out = lap.clone();
    for idx in 0..field.values.len() {
        if field.mask[idx] == Mask::Interior && !skipped.contains(&idx) {
            let u = field.values[idx];
            if u <= 0.0 {
                return Err(Error::NonpositiveField(format!("node {idx}: u = {u}")));
            }
            out.values[idx] = lap.values[idx] - source.eval(u)?;
        }
    }
    Ok(out)
}
