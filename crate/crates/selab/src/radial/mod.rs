//! Radial ODE machinery: shooting, boundary-value solves, the Emden–Fowler
//! change of variables, Euler-equation zeros, and the periodic limit
//! equation.

mod rk45;

use crate::core_model::{ProblemSpec, RadialProfile};
use crate::{Error, Result};
use rk45::{integrate, State, StepControl, Stop};

/// Positivity floor for touchdown detection: u^τ blows up below this and
/// step control would stall.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Integration control for radial shooting.
#[derive(Debug, Clone)]
pub struct ShootingConfig {
    /// Center value u(0).
    pub a: f64,
    pub r_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Number of uniform output samples on (0, r_max].
    pub samples: usize,
    /// Force a constant step (convergence-order studies only).
    pub fixed_step: Option<f64>,
}

impl ShootingConfig {
    pub fn new(a: f64, r_max: f64) -> Self {
        ShootingConfig {
            a,
            r_max,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 4_000_000,
            samples: 2000,
            fixed_step: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.a <= 0.0 {
            return Err(Error::InvalidSpec(format!("center value a = {} must be > 0", self.a)));
        }
        if self.r_max <= 0.0 || self.rel_tol <= 0.0 || self.abs_tol <= 0.0 {
            return Err(Error::InvalidSpec("r_max and tolerances must be > 0".into()));
        }
        Ok(())
    }

    /// Taylor start radius: the 1/r term is removable at the regular center
    /// and the quadratic start matches the ODE to O(r⁴).
    pub fn taylor_start(&self) -> f64 {
        (1e-3 * self.rel_tol.powf(0.25)).max(1e-6)
    }
}

/// Integrate u'' + (n−1)u'/r = f(u) outward from the regular center
/// u(0) = a, u'(0) = 0.
pub fn shoot_radial(spec: &ProblemSpec, config: &ShootingConfig) -> Result<RadialProfile> {
    spec.validate()?;
    config.validate()?;
    let n = spec.n as f64;
    let fa = spec.source.eval(config.a)?;
    // keep the quadratic Taylor term well below a so the start stays valid
    // for tiny center values
    let h_valid = 0.01 * (2.0 * n * config.a / fa.max(1e-300)).sqrt();
    let h0 = config.taylor_start().min(h_valid).min(config.r_max / 2.0);

    // Taylor start: u = a + f(a) r²/(2n) + O(r⁴)
    let u0 = config.a + fa * h0 * h0 / (2.0 * n);
    let du0 = fa * h0 / n;

    let source = spec.source.clone();
    let rhs = move |r: f64, y: &State| -> State {
        let u = y[0].max(POSITIVITY_FLOOR);
        let f = source.eval(u).unwrap_or(f64::INFINITY);
        [y[1], f - (n - 1.0) * y[1] / r]
    };

    let dr = config.r_max / config.samples as f64;
    let outputs: Vec<f64> = (1..=config.samples)
        .map(|i| i as f64 * dr)
        .filter(|&r| r > h0)
        .collect();

    let mut r = vec![0.0];
    let mut u = vec![config.a];
    let mut du = vec![0.0];
    let ctl = StepControl {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_steps: config.max_steps,
        fixed_step: config.fixed_step,
    };
    let stop = integrate(
        rhs,
        h0,
        [u0, du0],
        config.r_max,
        &outputs,
        &ctl,
        |x, y| {
            r.push(x);
            u.push(y[0]);
            du.push(y[1]);
        },
        |_x, y| y[0] < POSITIVITY_FLOOR,
    )?;
    if let Stop::Event(rt) = stop {
        return Err(Error::TouchdownDetected(rt));
    }
    RadialProfile::new(spec.n, spec.tau, r, u, du)
}

/// Boundary value of the shot solution, u(r_max; a), without building a
/// full profile. Used by the bisection bracket.
fn shoot_endpoint(spec: &ProblemSpec, a: f64, r_max: f64, rel_tol: f64) -> Result<f64> {
    let mut cfg = ShootingConfig::new(a, r_max);
    cfg.rel_tol = rel_tol;
    cfg.samples = 1;
    let profile = shoot_radial(spec, &cfg)?;
    Ok(*profile.u.last().unwrap())
}

/// Solve the radial Dirichlet problem u(R) = b on the ball B_R.
///
/// The endpoint map a -> u(R; a) is not monotone: it blows up as a -> 0
/// (small u makes u'' = u^tau large) and exceeds b at a = b (u is radially
/// increasing), so for b above the fold value there are two center values
/// hitting the target. We first locate the minimum of the endpoint map by
/// sampling plus golden-section refinement, then bisect on the increasing
/// branch, which returns the solution with the larger center value.
pub fn solve_radial_bvp(spec: &ProblemSpec, big_r: f64, b: f64) -> Result<RadialProfile> {
    if big_r <= 0.0 || b <= 0.0 {
        return Err(Error::InvalidRange(format!("R = {big_r}, b = {b} must be > 0")));
    }
    let rel_tol = 1e-12;
    // Endpoint map with failed shots (touchdown / step budget in the stiff
    // near-touchdown regime) treated as off-bracket.
    let endpoint = |a: f64| -> Result<Option<f64>> {
        match shoot_endpoint(spec, a, big_r, rel_tol) {
            Ok(v) => Ok(Some(v)),
            Err(Error::TouchdownDetected(_)) | Err(Error::BudgetExceeded(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let end_hi = shoot_endpoint(spec, b, big_r, rel_tol)?;
    if end_hi < b {
        return Err(Error::NoSolutionInBracket);
    }
    // Coarse scan for the minimum of the endpoint map on (0, b].
    const SCAN: usize = 48;
    let mut best_i = SCAN;
    let mut best_v = end_hi;
    let mut scan = |i: usize| -> Result<(f64, f64)> {
        let a = b * i as f64 / SCAN as f64;
        Ok((a, endpoint(a)?.unwrap_or(f64::INFINITY)))
    };
    for i in 1..SCAN {
        let (_, v) = scan(i)?;
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    // Golden-section refinement of the minimum between the scan neighbors.
    let (mut x_lo, _) = scan(best_i.saturating_sub(1).max(1))?;
    if best_i <= 1 {
        x_lo = b * 1e-6;
    }
    let (x_hi, _) = if best_i < SCAN { scan(best_i + 1)? } else { (b, end_hi) };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut p, mut q) = (x_lo, x_hi);
    let mut x1 = q - phi * (q - p);
    let mut x2 = p + phi * (q - p);
    let mut f1 = endpoint(x1)?.unwrap_or(f64::INFINITY);
    let mut f2 = endpoint(x2)?.unwrap_or(f64::INFINITY);
    for _ in 0..60 {
        if q - p < 1e-12 * b {
            break;
        }
        if f1 <= f2 {
            q = x2;
            x2 = x1;
            f2 = f1;
            x1 = q - phi * (q - p);
            f1 = endpoint(x1)?.unwrap_or(f64::INFINITY);
        } else {
            p = x1;
            x1 = x2;
            f1 = f2;
            x2 = p + phi * (q - p);
            f2 = endpoint(x2)?.unwrap_or(f64::INFINITY);
        }
    }
    let (a_min, end_min) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if end_min > b {
        return Err(Error::NoSolutionInBracket);
    }
    // Bisect on the increasing branch [a_min, b].
    let mut lo = a_min;
    let mut hi = b;
    let mut a_mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        a_mid = 0.5 * (lo + hi);
        match shoot_endpoint(spec, a_mid, big_r, rel_tol) {
            Ok(v) => {
                if (v - b).abs() <= 1e-10 * b {
                    break;
                }
                if v > b {
                    hi = a_mid;
                } else {
                    lo = a_mid;
                }
            }
            Err(Error::TouchdownDetected(_)) | Err(Error::BudgetExceeded(_)) => lo = a_mid,
            Err(e) => return Err(e),
        }
    }
    let mut cfg = ShootingConfig::new(a_mid, big_r);
    cfg.rel_tol = rel_tol;
    let profile = match shoot_radial(spec, &cfg) {
        Ok(p) => p,
        // the bracket collapsed into the near-touchdown regime
        Err(Error::TouchdownDetected(_)) | Err(Error::BudgetExceeded(_)) => {
            return Err(Error::NoSolutionInBracket)
        }
        Err(e) => return Err(e),
    };
    let end = *profile.u.last().unwrap();
    if (end - b).abs() > 1e-9 * b {
        return Err(Error::NoSolutionInBracket);
    }
    Ok(profile)
}

/// Emden–Fowler profile: u(r) = A_p r^{2/(p+1)} v(t), t = log r, with
/// A_p = ((p+1)/2)^{2/(p+1)}.
#[derive(Debug, Clone)]
pub struct EmdenFowlerProfile {
    pub p: f64,
    pub a_p: f64,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub vt: Vec<f64>,
}

pub fn emden_fowler_amplitude(p: f64) -> f64 {
    ((p + 1.0) / 2.0).powf(2.0 / (p + 1.0))
}

pub fn emden_fowler_forward(profile: &RadialProfile, p: f64) -> Result<EmdenFowlerProfile> {
    if p <= 0.0 {
        return Err(Error::UnsupportedExponent(-p));
    }
    if profile.r[0] == 0.0 {
        return Err(Error::LogSingularity);
    }
    profile.check_positive()?;
    let a_p = emden_fowler_amplitude(p);
    let beta = 2.0 / (p + 1.0);
    let mut t = Vec::with_capacity(profile.r.len());
    let mut v = Vec::with_capacity(profile.r.len());
    let mut vt = Vec::with_capacity(profile.r.len());
    for i in 0..profile.r.len() {
        let r = profile.r[i];
        let ti = r.ln();
        let scale = r.powf(-beta) / a_p;
        t.push(ti);
        v.push(scale * profile.u[i]);
        vt.push(scale * (r * profile.du[i] - beta * profile.u[i]));
    }
    Ok(EmdenFowlerProfile { p, a_p, t, v, vt })
}

/// Inverse transform back to a radial profile in n = 2.
pub fn emden_fowler_inverse(ef: &EmdenFowlerProfile) -> Result<RadialProfile> {
    let beta = 2.0 / (ef.p + 1.0);
    let mut r = Vec::with_capacity(ef.t.len());
    let mut u = Vec::with_capacity(ef.t.len());
    let mut du = Vec::with_capacity(ef.t.len());
    for i in 0..ef.t.len() {
        let ri = ef.t[i].exp();
        r.push(ri);
        u.push(ef.a_p * ri.powf(beta) * ef.v[i]);
        du.push(ef.a_p * ri.powf(beta - 1.0) * (beta * ef.v[i] + ef.vt[i]));
    }
    RadialProfile::new(2, -ef.p, r, u, du)
}

/// Positive zeros of the Euler equation −k″ − k′/r − (μ/r²)k = 0 above r0:
/// r_k = r0 · exp(kπ/√μ). Each analytic zero is cross-checked against a
/// numerical integration of the equation.
pub fn euler_ode_zeros(mu: f64, r0: f64, count: usize) -> Result<Vec<f64>> {
    if mu <= 0.0 {
        return Err(Error::NonOscillatory(mu));
    }
    if r0 <= 0.0 || count < 1 {
        return Err(Error::InvalidRange(format!("r0 = {r0}, count = {count}")));
    }
    let root_mu = mu.sqrt();
    let zeros: Vec<f64> = (1..=count)
        .map(|k| r0 * (k as f64 * std::f64::consts::PI / root_mu).exp())
        .collect();

    // cross-check: integrate k'' = -k'/r - mu k / r² from k(r0)=0, k'(r0)=√μ/r0
    let rhs = |r: f64, y: &State| -> State { [y[1], -y[1] / r - mu * y[0] / (r * r)] };
    let r_end = zeros.last().unwrap() * 1.05;
    let ctl = StepControl { rel_tol: 1e-12, abs_tol: 1e-14, max_steps: 10_000_000, fixed_step: None };
    let mut numeric_zeros = Vec::new();
    let mut prev: Option<(f64, [f64; 2])> = None;
    integrate(
        rhs,
        r0,
        [0.0, root_mu / r0],
        r_end,
        &[],
        &ctl,
        |_, _| {},
        |x, y| {
            if let Some((xp, yp)) = prev {
                if yp[0] != 0.0 && y[0] != 0.0 && yp[0].signum() != y[0].signum() {
                    numeric_zeros.push(hermite_root(xp, &yp, x, y));
                }
            }
            prev = Some((x, *y));
            false
        },
    )?;
    for (k, &z) in zeros.iter().enumerate() {
        let nz = numeric_zeros.get(k).copied().ok_or_else(|| {
            Error::EigenBudgetExceeded(format!("numeric integration found only {} zeros", numeric_zeros.len()))
        })?;
        if ((nz - z) / z).abs() > 1e-8 {
            return Err(Error::EigenBudgetExceeded(format!(
                "zero {k}: analytic {z} vs numeric {nz}"
            )));
        }
    }
    Ok(zeros)
}

/// Root of the cubic Hermite interpolant of (value, derivative) data on a
/// sign-changing step, by Newton iteration from the secant guess. The
/// interpolation error is O(h⁴), well inside the cross-check tolerance.
fn hermite_root(xa: f64, ya: &[f64; 2], xb: f64, yb: &[f64; 2]) -> f64 {
    let h = xb - xa;
    let mut t = ya[0] / (ya[0] - yb[0]);
    for _ in 0..12 {
        let t2 = t * t;
        let t3 = t2 * t;
        let val = (2.0 * t3 - 3.0 * t2 + 1.0) * ya[0]
            + (t3 - 2.0 * t2 + t) * h * ya[1]
            + (-2.0 * t3 + 3.0 * t2) * yb[0]
            + (t3 - t2) * h * yb[1];
        let slope = (6.0 * t2 - 6.0 * t) * ya[0]
            + (3.0 * t2 - 4.0 * t + 1.0) * h * ya[1]
            + (-6.0 * t2 + 6.0 * t) * yb[0]
            + (3.0 * t2 - 2.0 * t) * h * yb[1];
        if slope == 0.0 {
            break;
        }
        let step = val / slope;
        t = (t - step).clamp(0.0, 1.0);
        if step.abs() < 1e-16 {
            break;
        }
    }
    xa + t * h
}

/// Coefficient convention for the periodic limit equation
/// v_θθ + c₁ v − c₂ v^{−p} = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitConvention {
    /// c₁ = 4/(p+1)², c₂ = 1 (the displayed limit equation).
    Paper,
    /// c₁ = c₂ = 4/(p+1)² (consistent with the (t, θ) equation).
    VeqnConsistent,
    /// c₁ = c₂ = 1 (the Pinney normalisation for p = 3).
    Pinney,
}

impl LimitConvention {
    pub fn coefficients(self, p: f64) -> (f64, f64) {
        let c = 4.0 / ((p + 1.0) * (p + 1.0));
        match self {
            LimitConvention::Paper => (c, 1.0),
            LimitConvention::VeqnConsistent => (c, c),
            LimitConvention::Pinney => (1.0, 1.0),
        }
    }
}

/// Constant steady state v* = (c₂/c₁)^{1/(p+1)} of the limit equation.
pub fn constant_limit_solution(p: f64, convention: LimitConvention) -> f64 {
    let (c1, c2) = convention.coefficients(p);
    (c2 / c1).powf(1.0 / (p + 1.0))
}

/// Max residual |v_θθ + c₁ v − c₂ v^{−p}| of 2π-periodic samples on a
/// uniform θ grid, by fourth-order periodic differencing.
pub fn limit_ode_residual(v: &[f64], p: f64, convention: LimitConvention) -> Result<f64> {
    if v.len() < 5 {
        return Err(Error::InvalidRange("need at least 5 periodic samples".into()));
    }
    if let Some(&bad) = v.iter().find(|&&x| x <= 0.0) {
        return Err(Error::NonpositiveField(format!("v = {bad}")));
    }
    let (c1, c2) = convention.coefficients(p);
    let m = v.len();
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let vm2 = v[(i + m - 2) % m];
        let vm1 = v[(i + m - 1) % m];
        let vp1 = v[(i + 1) % m];
        let vp2 = v[(i + 2) % m];
        let vtt = (-vp2 + 16.0 * vp1 - 30.0 * v[i] + 16.0 * vm1 - vm2) / (12.0 * h * h);
        worst = worst.max((vtt + c1 * v[i] - c2 * v[i].powf(-p)).abs());
    }
    Ok(worst)
}

/// The Pinney periodic solution (λ cos²θ + λ⁻¹ sin²θ)^{1/2} of
/// v″ + v = v^{−3}.
pub fn pinney_solution(lambda: f64, theta: f64) -> f64 {
    let c = theta.cos();
    let s = theta.sin();
    (lambda * c * c + s * s / lambda).sqrt()
}
