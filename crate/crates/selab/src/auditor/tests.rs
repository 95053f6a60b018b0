use super::*;
use crate::core_model::{singular_solution, RadialProfile};
use crate::radial::{shoot_radial, ShootingConfig};
use crate::core_model::ProblemSpec;
use std::f64::consts::PI;

/// a·r^b on a stated radial range.
struct PowFn {
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
}

impl RadialFn for PowFn {
    fn value(&self, r: f64) -> f64 {
        self.a * r.powf(self.b)
    }
    fn deriv(&self, r: f64) -> f64 {
        self.a * self.b * r.powf(self.b - 1.0)
    }
    fn r_range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// a0 + c·r².
struct Quad {
    a0: f64,
    c: f64,
}

impl RadialFn for Quad {
    fn value(&self, r: f64) -> f64 {
        self.a0 + self.c * r * r
    }
    fn deriv(&self, r: f64) -> f64 {
        2.0 * self.c * r
    }
    fn r_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Blow-up rescaling v(r) = λ^{−2/(1−τ)} u(λr) of an analytic radial
/// function, used for the scale-consistency checks.
struct Rescaled<'a> {
    base: &'a dyn RadialFn,
    lambda: f64,
    beta: f64,
}

impl RadialFn for Rescaled<'_> {
    fn value(&self, r: f64) -> f64 {
        self.lambda.powf(-self.beta) * self.base.value(self.lambda * r)
    }
    fn deriv(&self, r: f64) -> f64 {
        self.lambda.powf(1.0 - self.beta) * self.base.deriv(self.lambda * r)
    }
    fn r_range(&self) -> (f64, f64) {
        let (lo, hi) = self.base.r_range();
        (lo / self.lambda, hi / self.lambda)
    }
}

fn shot_profile(n: usize, tau: f64, r_max: f64) -> RadialProfile {
    let spec = ProblemSpec::power_on_ball(n, tau, r_max, 1.0).unwrap();
    let mut cfg = ShootingConfig::new(1.0, r_max);
    cfg.samples = 4000;
    shoot_radial(&spec, &cfg).unwrap()
}

#[test]
fn report_schema_and_pass_invariant() {
    let u = Quad { a0: 1.0, c: 0.25 };
    let report = gradient_estimate_audit(&u, 2, 0.0, &[1.0, 2.0]).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    for key in ["check", "params", "empirical", "bound", "margin", "pass", "tol", "notes"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report.pass, report.margin >= -report.tol);
}

#[test]
fn cutoff_smooth_bump_bounds() {
    let c = CutoffSpec::smooth(1.0, 3.0).unwrap();
    assert_eq!(c.value(0.5), 1.0);
    assert_eq!(c.value(3.5), 0.0);
    let d = 2.0;
    for k in 0..=500 {
        let r = 1.0 + 2.0 * k as f64 / 500.0;
        assert!(c.grad(r).abs() <= 4.0 / d + 1e-12);
        assert!(c.second(r).abs() <= 100.0 / (d * d) + 1e-12);
    }
    // continuity at the seams
    assert!((c.value(1.0 + 1e-9) - 1.0).abs() < 1e-6);
    assert!(c.value(3.0 - 1e-9).abs() < 1e-6);
    assert!(matches!(CutoffSpec::smooth(3.0, 1.0), Err(Error::InvalidCutoff(_))));
}

#[test]
fn cutoff_log_profile() {
    let c = CutoffSpec::log(std::f64::consts::E).unwrap();
    assert!((c.value(std::f64::consts::E) - 1.0).abs() < 1e-12);
    assert!(c.value((2.0f64).exp()).abs() < 1e-12);
    let r = 1.5 * std::f64::consts::E;
    assert!((c.grad(r) + 1.0 / r).abs() < 1e-12);
    assert!(matches!(CutoffSpec::log(0.9), Err(Error::InvalidCutoff(_))));
}

#[test]
fn gradient_audit_quadratic_is_exactly_bounded() {
    // |grad u|² = r²/4 <= u = 1 + r²/4 pointwise, so C(R) = 0
    let u = Quad { a0: 1.0, c: 0.25 };
    let report = gradient_estimate_audit(&u, 2, 0.0, &[1.0, 4.0, 16.0]).unwrap();
    assert!(report.pass);
    assert_eq!(report.empirical, 0.0);
}

#[test]
fn gradient_audit_singular_equality_case() {
    // u = r, tau = -1: |grad u|² = 1 = u^{1+tau}
    let u = PowFn { a: 1.0, b: 1.0, lo: 0.0, hi: f64::INFINITY };
    let report = gradient_estimate_audit(&u, 2, -1.0, &[1.0, 10.0]).unwrap();
    assert!(report.pass);
    assert!(report.empirical < 1e-12);
    assert!(report.notes.contains("tau = -1"));
}

#[test]
fn gradient_audit_shot_profile_nonincreasing() {
    let u = shot_profile(3, -1.0, 8.0);
    let report = gradient_estimate_audit(&u, 3, -1.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    assert!(report.pass, "margin = {}", report.margin);
    let cs: Vec<f64> = report.params["C_list"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(cs.iter().all(|c| c.is_finite()));
    for w in cs.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-6), "C not nonincreasing: {cs:?}");
    }
}

#[test]
fn gradient_audit_rejects_nonpositive() {
    let u = Quad { a0: -1.0, c: 0.0 };
    assert!(matches!(
        gradient_estimate_audit(&u, 2, 0.0, &[1.0]),
        Err(Error::NonpositiveField(_))
    ));
}

#[test]
fn harnack_constant_solution_trivial() {
    let u = Quad { a0: 5.0, c: 0.0 };
    let cutoff = CutoffSpec::smooth(1.0, 2.0).unwrap();
    let report = harnack_bound_audit(&u, 3, -1.0, &cutoff).unwrap();
    assert!(report.pass);
    assert_eq!(report.empirical, 0.0);
}

#[test]
fn harnack_singular_annulus_margin_factor_two() {
    // u = r on [0.5, 10]: sup |grad w|² = 4 at r = 0.5, while 2 sup F = 8
    let u = PowFn { a: 1.0, b: 1.0, lo: 0.5, hi: 10.0 };
    let cutoff = CutoffSpec::smooth(2.0, 4.0).unwrap();
    let report = harnack_bound_audit(&u, 2, -1.0, &cutoff).unwrap();
    assert!(report.pass);
    assert!((report.empirical - 4.0).abs() < 1e-6, "sup = {}", report.empirical);
    assert!(report.bound >= 8.0 - 1e-6);
}

#[test]
fn harnack_shot_profile_passes() {
    let u = shot_profile(3, -1.0, 8.0);
    let cutoff = CutoffSpec::smooth(2.0, 6.0).unwrap();
    let report = harnack_bound_audit(&u, 3, -1.0, &cutoff).unwrap();
    assert!(report.pass, "margin = {}", report.margin);
    assert!(report.margin > 0.0);
}

#[test]
fn harnack_rejects_non_c2_cutoff() {
    let u = Quad { a0: 1.0, c: 0.0 };
    let cutoff = CutoffSpec::log(2.0).unwrap();
    assert!(matches!(
        harnack_bound_audit(&u, 2, -1.0, &cutoff),
        Err(Error::InvalidCutoff(_))
    ));
}

#[test]
fn moment_integral_matches_polar_quadrature() {
    // n=2, p=2: integral of |x| over B_R = 2 pi R^3 / 3
    for big_r in [1.0, 2.5] {
        let exact = 2.0 * PI * big_r * big_r * big_r / 3.0;
        assert!((moment_integral(2, 2.0, big_r) - exact).abs() < 1e-12 * exact);
        let quad = ball_integral(2, big_r, |r| r);
        assert!((quad - exact).abs() < 1e-9 * exact);
    }
}

#[test]
fn l1_audit_quadratic_ratio_approaches_pi_over_8() {
    let u = Quad { a0: 1.0, c: 0.25 };
    let report = l1_lower_bound_audit(&u, 2, 0.0, &[10.0, 50.0, 100.0]).unwrap();
    assert!(report.pass);
    let rho: Vec<f64> = report.params["rho_list"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // rho(R) = pi/R² + pi/8 -> pi/8
    assert!((rho[2] - PI / 8.0).abs() < 1e-3 * PI / 8.0, "rho = {rho:?}");
    assert!(rho[0] > rho[2]);
}

#[test]
fn l1_audit_singular_exactly_scale_invariant() {
    let u = singular_solution(2, -1.0).unwrap().as_radial().unwrap();
    let report = l1_lower_bound_audit(&u, 2, -1.0, &[1.0, 3.0, 9.0, 27.0]).unwrap();
    assert!(report.pass);
    let rho: Vec<f64> = report.params["rho_list"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // A = 1 for (2, -1), so rho = 2 pi / 3 exactly, independent of R
    let expected = 2.0 * PI / 3.0;
    for &r in &rho {
        assert!((r - expected).abs() < 1e-10 * expected, "rho = {rho:?}");
    }
}

#[test]
fn l1_audit_rejects_short_domain() {
    let u = PowFn { a: 1.0, b: 1.0, lo: 0.0, hi: 5.0 };
    assert!(matches!(
        l1_lower_bound_audit(&u, 2, -1.0, &[10.0]),
        Err(Error::OutOfDomain(_))
    ));
}

#[test]
fn l1_and_sup_audits_are_scale_consistent() {
    // rescaling v(r) = lambda^{-beta} u(lambda r) turns the dimensionless
    // ratios into the same ratios at radius lambda * R
    let u = Quad { a0: 1.0, c: 0.25 };
    let lambda = 2.0;
    let v = Rescaled { base: &u, lambda, beta: 2.0 }; // beta = 2/(1-0)
    let a = l1_lower_bound_audit(&u, 2, 0.0, &[4.0, 8.0]).unwrap();
    let b = l1_lower_bound_audit(&v, 2, 0.0, &[2.0, 4.0]).unwrap();
    let ra = a.params["rho_list"].as_array().unwrap();
    let rb = b.params["rho_list"].as_array().unwrap();
    for i in 0..2 {
        let x = ra[i].as_f64().unwrap();
        let y = rb[i].as_f64().unwrap();
        assert!((x - y).abs() < 1e-8 * x.abs(), "{x} vs {y}");
    }

    let a = sup_bound_audit(&u, 2, 1.0, 0.5, &[4.0, 8.0]).unwrap();
    let b = sup_bound_audit(&v, 2, 1.0, 0.5, &[2.0, 4.0]).unwrap();
    let ca = a.params["C_list"].as_array().unwrap();
    let cb = b.params["C_list"].as_array().unwrap();
    for i in 0..2 {
        let x = ca[i].as_f64().unwrap();
        let y = cb[i].as_f64().unwrap();
        assert!((x - y).abs() < 1e-8 * x.abs(), "{x} vs {y}");
    }
}

#[test]
fn growth_audit_exact_quadratic() {
    // u = 1 + r²/(2n): sup u/(r²+1) = 1 at r = 0, stable in range
    let u = Quad { a0: 1.0, c: 1.0 / 6.0 };
    let report = growth_bound_audit(&u, 3, 20.0).unwrap();
    assert!(report.pass);
    assert!(report.notes.contains("1.0000"));
}

#[test]
fn growth_audit_shot_profile() {
    let u = shot_profile(3, -1.0, 8.0);
    let report = growth_bound_audit(&u, 3, 8.0).unwrap();
    assert!(report.pass, "dev = {}", report.empirical);
}

#[test]
fn growth_audit_gates_on_hypothesis() {
    let u = PowFn { a: 1.0 / 2f64.sqrt(), b: 1.0, lo: 0.0, hi: f64::INFINITY };
    assert!(matches!(
        growth_bound_audit(&u, 3, 4.0),
        Err(Error::HypothesisViolated(_))
    ));
}

#[test]
fn pohozaev_singular_identities_and_sign() {
    // n = 4, tau = -9 < tau*(4) = -5
    let u = singular_solution(4, -9.0).unwrap().as_radial().unwrap();
    let k = 2.0 * u.value(1.0);
    let report = pohozaev_audit(&u, 4, -9.0, k).unwrap();
    assert!(report.pass, "residual = {}", report.empirical);
    assert!(report.empirical < 1e-6);
    let combination = report.params["combination"].as_f64().unwrap();
    assert!(combination < 0.0, "combination = {combination}");
    // sublevel set of k = 2 u(1) for u = A r^{1/5} is the ball of radius 32
    let a = report.params["sublevel_radius"].as_f64().unwrap();
    assert!((a - 32.0).abs() < 1e-6 * 32.0, "a = {a}");
}

#[test]
fn pohozaev_quadratic_tau_zero() {
    let u = Quad { a0: 1.0, c: 1.0 / 6.0 }; // laplacian = 1 in n = 3
    let report = pohozaev_audit(&u, 3, 0.0, u.value(2.0)).unwrap();
    assert!(report.pass, "residual = {}", report.empirical);
    assert!(report.empirical < 1e-8);
}

#[test]
fn pohozaev_rejections() {
    let u = Quad { a0: 1.0, c: 0.25 };
    assert!(matches!(
        pohozaev_audit(&u, 2, -1.0, 2.0),
        Err(Error::SingularExponent(_))
    ));
    assert!(matches!(
        pohozaev_audit(&u, 2, -2.0, 0.5),
        Err(Error::EmptySublevelSet(_))
    ));
}

#[test]
fn caccioppoli_constant_solution() {
    let u = Quad { a0: 10.0, c: 0.0 };
    let report = caccioppoli_audit(&u, 3, -1.0, 1.0, 4.0, 2.0).unwrap();
    assert!(report.pass);
    // LHS = 10^{sigma+tau} |B_rho| = vol(B_2)
    let vol = unit_ball_volume(3) * 8.0;
    assert!((report.empirical - vol).abs() < 1e-6 * vol);
    assert!(report.notes.contains("B_rho"));
}

#[test]
fn caccioppoli_shot_profile() {
    let u = shot_profile(3, -1.0, 4.5);
    let report = caccioppoli_audit(&u, 3, -1.0, 1.0, 4.0, 2.0).unwrap();
    assert!(report.pass, "margin = {}", report.margin);
}

#[test]
fn caccioppoli_limit_form_and_rejections() {
    let u = shot_profile(3, -1.0, 4.5);
    let report = caccioppoli_limit_audit(&u, 3, -1.0, 4.0, 2.0).unwrap();
    assert!(report.pass, "margin = {}", report.margin);
    assert!(matches!(
        caccioppoli_audit(&u, 3, -1.0, 0.0, 4.0, 2.0),
        Err(Error::InvalidRange(_))
    ));
    assert!(matches!(
        caccioppoli_limit_audit(&u, 3, -1.0, 2.0, 4.0),
        Err(Error::InvalidRange(_))
    ));
}

#[test]
fn sup_bound_constant_solution_closed_form() {
    let u = Quad { a0: 1.0, c: 0.0 };
    let report = sup_bound_audit(&u, 2, 1.0, 0.5, &[1.0, 2.0]).unwrap();
    assert!(report.pass);
    let cs = report.params["C_list"].as_array().unwrap();
    for (i, &big_r) in [1.0f64, 2.0].iter().enumerate() {
        let exact = (0.5 * big_r).powf(2.0) / (PI * big_r * big_r);
        let got = cs[i].as_f64().unwrap();
        assert!((got - exact).abs() < 1e-8 * exact, "{got} vs {exact}");
    }
}

#[test]
fn sup_bound_pure_quadratic_stable() {
    let u = PowFn { a: 1.0, b: 2.0, lo: 0.0, hi: f64::INFINITY };
    let report = sup_bound_audit(&u, 2, 1.0, 0.5, &[1.0, 2.0, 4.0]).unwrap();
    assert!(report.pass, "spread = {}", report.empirical);
}

#[test]
fn sup_bound_singular_scale_invariant() {
    let u = singular_solution(2, -1.0).unwrap().as_radial().unwrap();
    let report = sup_bound_audit(&u, 2, 2.0, 0.5, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    assert!(report.pass);
    assert!(report.empirical < 1e-8, "spread = {}", report.empirical);
}

#[test]
fn finite_index_singular_saturates_exponents() {
    let u = singular_solution(2, -1.0).unwrap().as_radial().unwrap();
    let report = finite_index_growth_audit(&u, 2, -1.0, 1000.0).unwrap();
    assert!(report.pass, "dev = {}", report.empirical);
    assert!(report.notes.contains("saturates"));
}

#[test]
fn finite_index_shot_profile_n2() {
    let u = shot_profile(2, -1.0, 1000.0);
    let report = finite_index_growth_audit(&u, 2, -1.0, 1000.0).unwrap();
    assert!(report.pass, "dev = {}", report.empirical);
}

#[test]
fn finite_index_tau_zero_reports_only() {
    let u = Quad { a0: 1.0, c: 0.25 };
    let report = finite_index_growth_audit(&u, 2, 0.0, 10.0).unwrap();
    assert!(report.pass);
    assert!(report.notes.contains("constants reported only"));
}
