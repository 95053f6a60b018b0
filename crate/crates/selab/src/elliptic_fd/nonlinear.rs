//! Nonlinear Dirichlet solvers for Δu = f(u) and touchdown continuation.

use serde::Serialize;

use super::{solver::solve_neg_laplacian, FdDomain};
use crate::core_model::{Boundary, GridField, Mask, ProblemSpec, Source};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Monotone,
    Newton,
    Energy,
}

/// Tolerances and budgets shared by the nonlinear solvers.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: Method,
    /// Outer residual tolerance (inf norm of Δ_h u − f(u)).
    pub tol: f64,
    pub max_outer: usize,
    /// Relative tolerance of the inner linear solves.
    pub linear_tol: f64,
    /// Iterates at or below this value count as touchdown.
    pub positivity_floor: f64,
    /// Averaging factor for the monotone iteration, u ← (1−ω)u + ω·T(u).
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Newton,
            tol: 1e-8,
            max_outer: 200,
            linear_tol: 1e-10,
            positivity_floor: 1e-12,
            damping: 0.5,
        }
    }
}

impl SolveOptions {
    /// Defaults with the positivity floor tied to the boundary data
    /// (1e-10 times its minimum).
    pub fn for_boundary(boundary: &Boundary) -> Self {
        SolveOptions { positivity_floor: 1e-10 * boundary.min_value(), ..Default::default() }
    }

    fn validate(&self, boundary: &Boundary) -> Result<()> {
        if self.tol <= 0.0 || self.linear_tol <= 0.0 {
            return Err(Error::InvalidSpec("tol and linear_tol must be > 0".into()));
        }
        if self.positivity_floor <= 0.0 || self.positivity_floor >= boundary.min_value() {
            return Err(Error::InvalidSpec(format!(
                "positivity_floor {} must lie in (0, min boundary value {})",
                self.positivity_floor,
                boundary.min_value()
            )));
        }
        if !(0.0 < self.damping && self.damping <= 1.0) {
            return Err(Error::InvalidSpec(format!("damping {} must be in (0, 1]", self.damping)));
        }
        Ok(())
    }
}

/// Order interval for the bracketing and energy methods: a sub-solution
/// field below and a constant super-solution above.
#[derive(Debug, Clone)]
pub struct ConstraintBox {
    pub lower: GridField,
    pub upper: f64,
}

impl ConstraintBox {
    fn lower_interior(&self, dom: &FdDomain) -> Result<Vec<f64>> {
        let lower = dom.restrict(&self.lower)?;
        if let Some(&bad) = lower.iter().find(|&&v| v <= 0.0) {
            return Err(Error::InvalidCoefficients(format!("constraint lower bound {bad} <= 0")));
        }
        if let Some(&bad) = lower.iter().find(|&&v| v > self.upper) {
            return Err(Error::InvalidCoefficients(format!(
                "constraint lower bound {bad} exceeds upper bound {}",
                self.upper
            )));
        }
        Ok(lower)
    }
}

fn source_values(source: &Source, u: &[f64], floor: f64) -> Result<Vec<f64>> {
    if let Some(&bad) = u.iter().find(|&&v| v <= floor) {
        return Err(Error::TouchdownDetected(bad));
    }
    u.iter().map(|&v| source.eval(v)).collect()
}

/// Sub/super bracketing for Δu = u^τ (τ ≤ 0). The solve map
/// T(u) = Δ⁻¹-solve of Δv = f(u) with the Dirichlet data is the composition
/// of two antitone maps and therefore order-preserving, so the sequences
/// started at the sub-solution and at the constant super-solution stay
/// ordered and bracket every fixed point. Averaging with factor ω guards
/// the inexact inner solves.
pub fn monotone_iterate(
    spec: &ProblemSpec,
    dom: &FdDomain,
    cbox: &ConstraintBox,
    options: &SolveOptions,
) -> Result<GridField> {
    spec.validate()?;
    options.validate(&spec.boundary)?;
    let bvals = dom.boundary_values(&spec.boundary)?;
    let mut lo = cbox.lower_interior(dom)?;
    let mut up = vec![cbox.upper; dom.interior_len()];
    // a constant source makes T constant: no damping needed, one step lands
    let omega = if matches!(spec.source, Source::Unit) { 1.0 } else { options.damping };

    // the achievable bracket width and final residual are floored by the
    // inner solve accuracy, so tie it to the outer tolerance
    let inner_tol = (options.tol * 1e-4).clamp(1e-14, options.linear_tol);
    let step = |u: &[f64], warm: &[f64]| -> Result<Vec<f64>> {
        let f = source_values(&spec.source, u, options.positivity_floor)?;
        let neg_f: Vec<f64> = f.iter().map(|&v| -v).collect();
        solve_neg_laplacian(dom, &neg_f, &bvals, Some(warm), inner_tol)
    };

    let mut width = f64::INFINITY;
    let mut converged = false;
    for _ in 0..options.max_outer {
        let tlo = step(&lo, &lo)?;
        let tup = step(&up, &up)?;
        for i in 0..lo.len() {
            lo[i] = (1.0 - omega) * lo[i] + omega * tlo[i];
            up[i] = (1.0 - omega) * up[i] + omega * tup[i];
        }
        width = lo.iter().zip(&up).map(|(&a, &b)| (b - a).abs()).fold(0.0, f64::max);
        if width < options.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::BracketStalled(format!(
            "bracket width {width:.3e} > tol {:.3e} after {} iterations (damping {omega})",
            options.tol, options.max_outer
        )));
    }
    // polish the midpoint until the PDE residual meets the tolerance
    let mut mid: Vec<f64> = lo.iter().zip(&up).map(|(&a, &b)| 0.5 * (a + b)).collect();
    for _ in 0..options.max_outer {
        if dom.pde_residual_inf(&mid, &bvals, &spec.source)? < options.tol {
            return dom.to_field(&mid, &spec.boundary);
        }
        mid = step(&mid, &mid)?;
    }
    Err(Error::BracketStalled(format!(
        "midpoint residual stayed above tol {:.3e} (damping {omega})",
        options.tol
    )))
}

/// Damped Newton iteration on F(u) = −Δ_h u + f(u) with a residual-decrease
/// line search that also enforces the positivity floor.
pub fn newton_solve(
    spec: &ProblemSpec,
    dom: &FdDomain,
    init: &GridField,
    options: &SolveOptions,
) -> Result<GridField> {
    spec.validate()?;
    options.validate(&spec.boundary)?;
    let bvals = dom.boundary_values(&spec.boundary)?;
    let brhs = dom.boundary_rhs(&bvals);
    let mut u = dom.restrict(init)?;
    if let Some(&bad) = u.iter().find(|&&v| v <= options.positivity_floor) {
        return Err(Error::TouchdownDetected(bad));
    }

    let residual = |u: &[f64]| -> Result<Vec<f64>> {
        let f = source_values(&spec.source, u, options.positivity_floor)?;
        let mut au = vec![0.0; u.len()];
        dom.matvec(u, None, &mut au);
        Ok((0..u.len()).map(|i| au[i] - brhs[i] + f[i]).collect())
    };
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    let mut fvec = residual(&u)?;
    let mut fnorm = inf(&fvec);
    for _ in 0..options.max_outer {
        if fnorm < options.tol {
            return dom.to_field(&u, &spec.boundary);
        }
        let dshift: Vec<f64> = u.iter().map(|&v| spec.source.deriv(v)).collect::<Result<_>>()?;
        // safeguard the Jacobi diagonal where f' cancels the stencil diagonal
        let raw_diag = dom.diagonal(Some(&dshift));
        let base_diag = dom.diagonal(None);
        let pre_diag: Vec<f64> = raw_diag
            .iter()
            .zip(&base_diag)
            .map(|(&d, &b)| if d.abs() < 1e-8 * b { b } else { d.abs() })
            .collect();
        let neg_f: Vec<f64> = fvec.iter().map(|&v| -v).collect();
        let s = super::solver::bicgstab(
            |v, out| dom.matvec(v, Some(&dshift), out),
            &pre_diag,
            &neg_f,
            None,
            options.linear_tol.max(1e-12),
            (40 * u.len()).max(20_000),
        )?;
        let mut alpha = 1.0f64;
        let mut accepted = false;
        while alpha > 2f64.powi(-40) {
            let trial: Vec<f64> = u.iter().zip(&s).map(|(&ui, &si)| ui + alpha * si).collect();
            if trial.iter().any(|&v| v <= options.positivity_floor) {
                alpha *= 0.5;
                continue;
            }
            let tf = residual(&trial)?;
            let tn = inf(&tf);
            if tn <= (1.0 - 0.25 * alpha) * fnorm {
                u = trial;
                fvec = tf;
                fnorm = tn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonStalled(format!(
                "line search exhausted at residual {fnorm:.3e}"
            )));
        }
    }
    if fnorm < options.tol {
        dom.to_field(&u, &spec.boundary)
    } else {
        Err(Error::NewtonStalled(format!(
            "residual {fnorm:.3e} > tol {:.3e} after {} iterations",
            options.tol, options.max_outer
        )))
    }
}

/// True when the functional is unbounded below (τ < −1): the value is still
/// computed but minimisation is meaningless.
pub fn energy_unbounded_below(tau: f64) -> bool {
    tau < -1.0
}

fn check_energy_exponent(tau: f64) -> Result<()> {
    if tau == -1.0 {
        return Err(Error::SingularExponent(tau));
    }
    Ok(())
}

/// Discrete functional J(u) = ½ Σ |Du|² hⁿ + (1/(1+τ)) Σ u^{1+τ} hⁿ with
/// forward-difference gradients over non-exterior arm pairs and the
/// potential summed over interior nodes.
pub fn energy_value(field: &GridField, spec: &ProblemSpec) -> Result<f64> {
    check_energy_exponent(spec.tau)?;
    let n = field.dims.len();
    let hn = field.h.powi(n as i32);
    let strides = super::strides_of(&field.dims);
    let mut dirichlet = 0.0;
    let mut potential = 0.0;
    for flat in 0..field.values.len() {
        if field.mask[flat] == Mask::Exterior {
            continue;
        }
        if field.mask[flat] == Mask::Interior {
            let u = field.values[flat];
            if u <= 0.0 {
                return Err(Error::NonpositiveField(format!("node {flat}: u = {u}")));
            }
            potential += u.powf(1.0 + spec.tau) / (1.0 + spec.tau);
        }
        let idx = field.multi_index(flat);
        for a in 0..n {
            if idx[a] + 1 >= field.dims[a] {
                continue;
            }
            let nb = flat + strides[a];
            if field.mask[nb] == Mask::Exterior {
                continue;
            }
            if field.mask[flat] != Mask::Interior && field.mask[nb] != Mask::Interior {
                continue;
            }
            let d = (field.values[nb] - field.values[flat]) / field.h;
            dirichlet += 0.5 * d * d;
        }
    }
    Ok((dirichlet + potential) * hn)
}

/// Exact differential of `energy_value` with respect to the interior
/// values (zero at boundary and exterior nodes).
pub fn energy_gradient(field: &GridField, spec: &ProblemSpec) -> Result<GridField> {
    check_energy_exponent(spec.tau)?;
    let n = field.dims.len();
    let hn = field.h.powi(n as i32);
    let h2 = field.h * field.h;
    let strides = super::strides_of(&field.dims);
    let mut out = field.clone();
    out.values.iter_mut().for_each(|v| *v = 0.0);
    for flat in 0..field.values.len() {
        if field.mask[flat] != Mask::Interior {
            continue;
        }
        let u = field.values[flat];
        if u <= 0.0 {
            return Err(Error::NonpositiveField(format!("node {flat}: u = {u}")));
        }
        let idx = field.multi_index(flat);
        let mut g = u.powf(spec.tau);
        for a in 0..n {
            for dir in [-1isize, 1] {
                let j = idx[a] as isize + dir;
                if j < 0 || j as usize >= field.dims[a] {
                    continue;
                }
                let nb = (flat as isize + dir * strides[a] as isize) as usize;
                if field.mask[nb] == Mask::Exterior {
                    continue;
                }
                g += (u - field.values[nb]) / h2;
            }
        }
        out.values[flat] = g * hn;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub field: GridField,
    pub converged: bool,
    pub iterations: usize,
    /// Energy after every accepted step (monotone decreasing).
    pub energies: Vec<f64>,
    pub projected_gradient_norm: f64,
}

/// Projected gradient descent with backtracking on the constrained discrete
/// functional. Returns the best iterate with `converged = false` when the
/// iteration budget runs out before stationarity.
pub fn minimize_energy(
    spec: &ProblemSpec,
    dom: &FdDomain,
    cbox: &ConstraintBox,
    options: &SolveOptions,
) -> Result<MinimizeResult> {
    spec.validate()?;
    check_energy_exponent(spec.tau)?;
    options.validate(&spec.boundary)?;
    let bvals = dom.boundary_values(&spec.boundary)?;
    let brhs = dom.boundary_rhs(&bvals);
    let lower = cbox.lower_interior(dom)?;
    let upper = cbox.upper;

    // quadratic part through the assembled operator so the pair
    // (objective, gradient) is exactly consistent
    let objective = |u: &[f64], au: &[f64]| -> f64 {
        let mut j = 0.0;
        for i in 0..u.len() {
            j += 0.5 * u[i] * au[i] - u[i] * brhs[i]
                + u[i].powf(1.0 + spec.tau) / (1.0 + spec.tau);
        }
        j
    };
    let hn = dom.h.powi(dom.n as i32);
    let mut au = vec![0.0; dom.interior_len()];
    let mut atu = vec![0.0; dom.interior_len()];
    let gradient = |u: &[f64], au: &mut [f64], atu: &mut [f64]| -> Vec<f64> {
        dom.matvec(u, None, au);
        dom.matvec_transpose(u, None, atu);
        (0..u.len())
            .map(|i| 0.5 * (au[i] + atu[i]) - brhs[i] + u[i].powf(spec.tau))
            .collect()
    };
    let project =
        |v: &mut [f64]| v.iter_mut().zip(&lower).for_each(|(x, &lo)| *x = x.clamp(lo, upper));

    let mut u: Vec<f64> = lower.iter().map(|&lo| 0.5 * (lo + upper)).collect();
    let mut g = gradient(&u, &mut au, &mut atu);
    let mut j = objective(&u, &au);
    let mut energies = vec![j * hn];
    let lip = dom.diagonal(None).iter().cloned().fold(0.0, f64::max)
        + spec.tau.abs() * lower.iter().cloned().fold(f64::INFINITY, f64::min).powf(spec.tau - 1.0);
    let mut step = 1.0 / lip.max(1e-300);
    let mut pg_norm = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..options.max_outer {
        iterations = it;
        let mut trial_dir: Vec<f64> = u.iter().zip(&g).map(|(&ui, &gi)| ui - gi).collect();
        project(&mut trial_dir);
        pg_norm = u
            .iter()
            .zip(&trial_dir)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max);
        if pg_norm < options.tol {
            let field = dom.to_field(&u, &spec.boundary)?;
            return Ok(MinimizeResult {
                field,
                converged: true,
                iterations,
                energies,
                projected_gradient_norm: pg_norm,
            });
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = u.iter().zip(&g).map(|(&ui, &gi)| ui - step * gi).collect();
            project(&mut trial);
            let decrease: f64 = u
                .iter()
                .zip(&trial)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<f64>()
                / step.max(1e-300);
            dom.matvec(&trial, None, &mut au);
            let jt = objective(&trial, &au);
            // the rounding slack keeps progress alive once the true
            // decrease per step drops below the resolution of j
            if jt <= j - 1e-4 * decrease + 4.0 * f64::EPSILON * j.abs() {
                u = trial;
                j = jt;
                energies.push(j * hn);
                g = gradient(&u, &mut au, &mut atu);
                // recover step length cautiously but never beyond 1/L:
                // larger steps pass the line search yet crawl along the
                // dominant eigendirections
                step = (step * 1.3).min(1.0 / lip.max(1e-300));
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let field = dom.to_field(&u, &spec.boundary)?;
    Ok(MinimizeResult {
        field,
        converged: false,
        iterations,
        energies,
        projected_gradient_norm: pg_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationStatus {
    Ok,
    Touchdown,
    Stalled,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationRow {
    pub b: f64,
    pub min_u: Option<f64>,
    pub status: ContinuationStatus,
}

/// Sweep the constant boundary value down a geometric schedule from `b_hi`
/// to `b_lo`, warm-starting each Newton solve from the previous solution.
/// Failures are recorded per row, never raised.
pub fn touchdown_continuation(
    spec: &ProblemSpec,
    dom: &FdDomain,
    b_hi: f64,
    b_lo: f64,
    steps: usize,
) -> Result<Vec<ContinuationRow>> {
    if !(b_lo > 0.0 && b_hi > b_lo) || steps < 2 {
        return Err(Error::InvalidRange(format!(
            "need b_hi > b_lo > 0 and steps >= 2, got b_hi = {b_hi}, b_lo = {b_lo}, steps = {steps}"
        )));
    }
    let ratio = (b_lo / b_hi).powf(1.0 / (steps - 1) as f64);
    let mut rows = Vec::with_capacity(steps);
    let mut warm: Vec<f64> = vec![b_hi; dom.interior_len()];
    let mut b = b_hi;
    for j in 0..steps {
        let boundary = Boundary::Constant(b);
        let mut options = SolveOptions::for_boundary(&boundary);
        options.max_outer = 80;
        let local = ProblemSpec { boundary: boundary.clone(), ..spec.clone() };
        let floor = options.positivity_floor;
        let init: Vec<f64> = warm.iter().map(|&v| v.max(2.0 * floor)).collect();
        let init_field = dom.to_field(&init, &boundary)?;
        match newton_solve(&local, dom, &init_field, &options) {
            Ok(field) => {
                let sol = dom.restrict(&field)?;
                let min_u = sol.iter().cloned().fold(f64::INFINITY, f64::min);
                rows.push(ContinuationRow { b, min_u: Some(min_u), status: ContinuationStatus::Ok });
                warm = sol;
            }
            Err(e) => {
                let status = match e {
                    Error::TouchdownDetected(_) => ContinuationStatus::Touchdown,
                    Error::NewtonStalled(_) => ContinuationStatus::Stalled,
                    _ => ContinuationStatus::Failed,
                };
                rows.push(ContinuationRow { b, min_u: None, status });
            }
        }
        if j + 1 < steps {
            warm.iter_mut().for_each(|v| *v *= ratio);
            b *= ratio;
        }
    }
    Ok(rows)
}
