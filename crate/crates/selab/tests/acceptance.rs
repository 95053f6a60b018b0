//! Acceptance gate: every top-level requirement, one pass/fail line each.
//!
//! Each criterion prints `criterion N (<name>): PASS` or `... FAIL` so the
//! suite output doubles as the acceptance report (run with
//! `cargo test --test acceptance -- --nocapture` to see every line).

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use selab::auditor::{
    self, ball_integral, gradient_estimate_audit, growth_bound_audit, l1_lower_bound_audit,
    pohozaev_audit, sup_bound_audit,
};
use selab::core_model::{
    liouville_coefficient, pde_residual_closed_form, printed_amplitude, quadratic_solution,
    rescale_blowup_profile, singular_amplitude, singular_solution, Boundary, Domain, GridField,
    ProblemSpec, RadialFn, RadialProfile, Source,
};
use selab::elliptic_fd::{
    discrete_laplacian_partial, newton_solve, touchdown_continuation, ContinuationStatus,
    FdDomain, SolveOptions,
};
use selab::potential::{
    hls_exponents, kelvin_transform, reflection_difference_check, solve_integral_equation,
    symmetry_defect, PicardOptions, ReflectionPlane, RieszKernelSpec,
};
use selab::radial::{shoot_radial, solve_radial_bvp, ShootingConfig};
use selab::spectral::{
    assemble_linearized, euler_test_functions, hardy_stability_check, morse_index,
};
use selab::Error;

/// Run one criterion, printing exactly one pass/fail line.
fn criterion(id: usize, name: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("criterion {id} ({name}): PASS"),
        Err(payload) => {
            println!("criterion {id} ({name}): FAIL");
            std::panic::resume_unwind(payload);
        }
    }
}

fn shot_profile(n: usize, tau: f64, a: f64, r_max: f64) -> RadialProfile {
    let spec = ProblemSpec::power_on_ball(n, tau, r_max, a).unwrap();
    let mut cfg = ShootingConfig::new(a, r_max);
    cfg.samples = 4000;
    shoot_radial(&spec, &cfg).unwrap()
}

// --- 1. singular-solution oracle + printed-amplitude golden report ---

#[test]
fn criterion_01_singular_solution_oracle() {
    criterion(1, "singular-solution oracle", || {
        for n in [2usize, 3, 4, 5] {
            for tau in [-1.0, -2.0, -5.0] {
                let cf = singular_solution(n, tau).unwrap();
                let source = Source::power(tau);
                for r in [0.1, 1.0, 10.0] {
                    let mut x = vec![0.0; n];
                    x[0] = r;
                    let res = pde_residual_closed_form(&cf, &source, &x).unwrap();
                    assert!(
                        res.abs() < 1e-10,
                        "residual {res:.3e} at n = {n}, tau = {tau}, r = {r}"
                    );
                }
            }
        }
        // the amplitude formula in circulation fails the same oracle at
        // (3, -1); the discrepancy is pinned by a golden report
        let golden: serde_json::Value = serde_json::from_str(include_str!(
            "golden/printed_amplitude.json"
        ))
        .unwrap();
        let derived = singular_amplitude(3, -1.0);
        let printed = printed_amplitude(3, -1.0);
        assert!((derived - golden["derived_amplitude"].as_f64().unwrap()).abs() < 1e-15);
        assert!((printed - golden["printed_amplitude"].as_f64().unwrap()).abs() < 1e-15);
        // residual of the printed-amplitude candidate u = A r at r = 1:
        // Δu - u^tau = 2A - 1/A
        let res_printed = 2.0 * printed - 1.0 / printed;
        assert!(
            (res_printed - golden["printed_residual_at_r1"].as_f64().unwrap()).abs() < 1e-15
        );
        assert!(res_printed.abs() > 0.5, "printed amplitude should fail the oracle");
    });
}

// --- 2. quadratic family ---

#[test]
fn criterion_02_quadratic_family_discrete_laplacian() {
    criterion(2, "quadratic family", || {
        let cases = [
            (2usize, 21usize, 0.09375, vec![0.25, 0.25]),
            (2, 34, 0.077, vec![0.4, 0.1]),
            (3, 13, 0.21, vec![0.2, 0.2, 0.1]),
        ];
        for (n, m, h, coeffs) in cases {
            let cf = quadratic_solution(1.0, &coeffs).unwrap();
            let origin = vec![-(m as f64 - 1.0) * h / 2.0; n];
            let field =
                GridField::from_fn(&vec![m; n], h, &origin, |x| cf.eval(x)).unwrap();
            let (lap, skipped) = discrete_laplacian_partial(&field).unwrap();
            let skip: std::collections::HashSet<usize> = skipped.into_iter().collect();
            let mut checked = 0usize;
            for (i, &v) in lap.values.iter().enumerate() {
                if skip.contains(&i) {
                    continue;
                }
                assert!(
                    (v - 1.0).abs() < 1e-12,
                    "Laplacian {v} at node {i} (n = {n}, m = {m})"
                );
                checked += 1;
            }
            assert_eq!(checked, (m - 2).pow(n as u32), "full-stencil node count");
        }
    });
}

// --- 3. solver convergence ---

fn dirichlet_sup_error(spec: &ProblemSpec, m: usize, exact: impl Fn(&[f64]) -> f64) -> f64 {
    let dom = FdDomain::build(spec, m).unwrap();
    let b = match spec.boundary {
        Boundary::Constant(b) => b,
        _ => unreachable!(),
    };
    let init = dom.to_field(&vec![b; dom.interior_len()], &spec.boundary).unwrap();
    let mut options = SolveOptions::for_boundary(&spec.boundary);
    options.tol = 1e-10;
    let field = newton_solve(spec, &dom, &init, &options).unwrap();
    let sol = dom.restrict(&field).unwrap();
    let mut err = 0.0f64;
    for (q, &v) in sol.iter().enumerate() {
        let x = dom.interior_coord(q);
        err = err.max((v - exact(&x)).abs());
    }
    err
}

#[test]
fn criterion_03_solver_convergence() {
    criterion(3, "solver convergence", || {
        // tau = 0 against the exact quadratic 1 + |x|²/4 on the radius-2
        // disk: the stencil is exact for quadratics, so the error sits at
        // the solver tolerance and the order test is vacuous
        let spec = ProblemSpec::power_on_ball(2, 0.0, 2.0, 2.0).unwrap();
        let errs: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&m| {
                dirichlet_sup_error(&spec, m, |x| {
                    1.0 + 0.25 * (x[0] * x[0] + x[1] * x[1])
                })
            })
            .collect();
        if errs.iter().any(|&e| e > 1e-7) {
            let order = (errs[0] / errs[2]).log2() / 2.0;
            assert!(order >= 1.8, "tau = 0 order {order:.2} from errors {errs:?}");
        }

        // tau = -1 against the radial boundary-value oracle
        let spec = ProblemSpec::power_on_ball(2, -1.0, 1.0, 2.0).unwrap();
        let oracle = solve_radial_bvp(&spec, 1.0, 2.0).unwrap();
        let errs: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&m| {
                dirichlet_sup_error(&spec, m, |x| {
                    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                    oracle.value_at(r.min(oracle.r_max())).unwrap()
                })
            })
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(
            order >= 1.8,
            "tau = -1 measured order {order:.2} from errors {errs:?}"
        );
    });
}

// --- 4. gradient estimate audit ---

#[test]
fn criterion_04_gradient_estimate() {
    criterion(4, "gradient estimate", || {
        // shot solutions: empirical constant finite
        for (n, tau) in [(2usize, -1.0), (2, -2.0), (3, -1.0), (3, -2.0)] {
            let profile = shot_profile(n, tau, 1.0, 50.0);
            let rep =
                gradient_estimate_audit(&profile, n, tau, &[6.25, 12.5, 25.0, 50.0]).unwrap();
            assert!(
                rep.empirical.is_finite() && rep.empirical >= 0.0,
                "C not finite at n = {n}, tau = {tau}"
            );
        }
        // the two closed-form cases give exactly zero
        let quad = quadratic_solution(1.0, &[0.25, 0.25]).unwrap();
        let rep = gradient_estimate_audit(
            &quad.as_radial().unwrap(),
            2,
            0.0,
            &[1.0, 2.0, 4.0],
        )
        .unwrap();
        assert_eq!(rep.empirical, 0.0, "quadratic C = {}", rep.empirical);
        let sing = singular_solution(3, -2.0).unwrap();
        let rep = gradient_estimate_audit(
            &sing.as_radial().unwrap(),
            3,
            -2.0,
            &[1.0, 2.0, 4.0],
        )
        .unwrap();
        assert_eq!(rep.empirical, 0.0, "singular C = {}", rep.empirical);
    });
}

// --- 5. L¹ lower bound ---

#[test]
fn criterion_05_l1_lower_bound() {
    criterion(5, "L1 lower bound", || {
        let r_list: Vec<f64> = (0..7).map(|k| (1u32 << k) as f64).collect(); // 1..64
        // singular solution: rho(R) exactly constant
        let sing = singular_solution(2, -1.0).unwrap().as_radial().unwrap();
        let expo = 2.0 + 2.0 / (1.0 - (-1.0));
        let rho: Vec<f64> = r_list
            .iter()
            .map(|&r| ball_integral(2, r, |s| sing.value(s)) / r.powf(expo))
            .collect();
        for &v in &rho {
            assert!((v - rho[0]).abs() < 1e-10 * rho[0], "rho drift {rho:?}");
        }
        // shot entire solutions: inf rho > 0, ratio drift < 10% per
        // doubling at large R
        for (n, tau) in [(2usize, -1.0), (2, -2.0), (3, -1.0), (3, -2.0)] {
            let profile = shot_profile(n, tau, 1.0, 100.0);
            let rep = l1_lower_bound_audit(&profile, n, tau, &r_list).unwrap();
            assert!(rep.pass, "l1 audit fails at n = {n}, tau = {tau}");
            let rho: Vec<f64> = rep.params["rho_list"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            assert!(rho.iter().all(|&v| v > 0.0));
            let m = rho.len();
            for w in rho[m - 3..].windows(2) {
                let drift = (w[1] / w[0] - 1.0).abs();
                assert!(
                    drift < 0.10,
                    "rho doubling drift {drift:.3} at n = {n}, tau = {tau} ({rho:?})"
                );
            }
        }
    });
}

// --- 6. growth bound ---

#[test]
fn criterion_06_growth_bound() {
    criterion(6, "growth bound", || {
        for (n, tau) in [(2usize, -1.0), (2, -2.0), (3, -1.0), (3, -2.0)] {
            let profile = shot_profile(n, tau, 1.0, 1000.0);
            let rep = growth_bound_audit(&profile, n, 1000.0).unwrap();
            assert!(
                rep.pass,
                "growth constant drifts at n = {n}, tau = {tau}: margin {}",
                rep.margin
            );
        }
    });
}

// --- 7. Pohozaev / Liouville ---

#[test]
fn criterion_07_pohozaev_liouville() {
    criterion(7, "Pohozaev/Liouville", || {
        // identity residuals on singular profiles, refined against the
        // sublevel parameter
        for (n, tau) in [(4usize, -9.0), (3, -8.0), (5, -5.0), (6, -5.0)] {
            let u = singular_solution(n, tau).unwrap().as_radial().unwrap();
            for k_mult in [1.5, 2.0, 3.0] {
                let k = k_mult * u.value(1.0);
                let rep = pohozaev_audit(&u, n, tau, k).unwrap();
                assert!(
                    rep.pass && rep.empirical < 1e-6,
                    "residual {} at n = {n}, tau = {tau}, k x {k_mult}",
                    rep.empirical
                );
                // combination strictly negative below the critical exponent
                let comb = rep.params["combination"].as_f64().unwrap();
                assert!(comb < 0.0, "combination {comb} at n = {n}, tau = {tau}");
            }
        }
        // liouville coefficient vanishes exactly at tau*(n)
        for n in [3usize, 4, 5, 6] {
            let (_, tau_star) = liouville_coefficient(n, -2.0).unwrap();
            let (coeff, _) = liouville_coefficient(n, tau_star).unwrap();
            // tau* is not exactly representable for odd n, so allow rounding.
            assert!(coeff.abs() < 1e-15, "coefficient at tau*({n}) = {tau_star}: {coeff}");
            // and every tested tau above sits strictly below tau*
            assert!(tau_star < -1.0);
        }
    });
}

// --- 8. spectral thresholds ---

#[test]
fn criterion_08_spectral_thresholds() {
    criterion(8, "spectral thresholds", || {
        // printed example values
        let h7 = hardy_stability_check(7, -1.0);
        assert!((h7.lhs - 6.0).abs() < 1e-12 && (h7.rhs - 6.25).abs() < 1e-12 && h7.stable);
        let h6 = hardy_stability_check(6, -1.0);
        assert!((h6.lhs - 5.0).abs() < 1e-12 && (h6.rhs - 4.0).abs() < 1e-12 && !h6.stable);

        // Hardy criterion vs. the discrete ground state at R = 100
        for n in 3usize..=8 {
            for tau in [-1.0, -2.0] {
                let check = hardy_stability_check(n, tau);
                let u = singular_solution(n, tau).unwrap().as_radial().unwrap();
                let spec = ProblemSpec::power_on_ball(n, tau, 100.0, u.value(100.0)).unwrap();
                let op = assemble_linearized(&u, &spec, 0, 3000).unwrap();
                let lambda1 = op.eigenvalue(0);
                if check.stable {
                    assert!(
                        lambda1 >= -1e-6,
                        "stable case n = {n}, tau = {tau} has lambda1 = {lambda1:.3e}"
                    );
                } else {
                    assert!(
                        lambda1 < -1e-4,
                        "unstable case n = {n}, tau = {tau} has lambda1 = {lambda1:.3e}"
                    );
                }
            }
        }
    });
}

// --- 9. Morse-index growth in n = 2 ---

#[test]
fn criterion_09_morse_index_growth() {
    criterion(9, "Morse index growth", || {
        let u = singular_solution(2, -1.0).unwrap().as_radial().unwrap();
        let spec = ProblemSpec::new(
            2,
            -1.0,
            Source::power(-1.0),
            Domain::Annulus { inner: 1.0, outer: 10.0 },
            Boundary::Constant(1.0),
        )
        .unwrap();
        // log R increments of pi/sqrt(mu) + 10% slack with mu = 1
        let step = 1.1 * PI;
        let ts: Vec<f64> = (0..4).map(|j| 1.2 * PI + j as f64 * step).collect();
        let mut prev = None;
        for &t in &ts {
            let rep = morse_index(&u, &spec, t.exp(), 4, 3000, Some(1e-13)).unwrap();
            if let Some(p) = prev {
                assert!(
                    rep.morse_index >= p + 1,
                    "index {} after {p} at log R = {t:.2}",
                    rep.morse_index
                );
            }
            prev = Some(rep.morse_index);
        }

        // every Euler test function under the 2 mu / r² margin hypothesis
        // certifies a negative direction
        let s = 2f64.sqrt();
        let samples = 3000;
        let (r_lo, r_hi) = (1.0, (3.2 * PI).exp());
        let (r, u, du): (Vec<f64>, Vec<f64>, Vec<f64>) = {
            let mut r = Vec::new();
            let mut uu = Vec::new();
            let mut du = Vec::new();
            for i in 0..samples {
                let t = i as f64 / (samples - 1) as f64;
                let ri: f64 = r_lo * (r_hi / r_lo).powf(t);
                r.push(ri);
                uu.push(ri / s);
                du.push(1.0 / s);
            }
            (r, uu, du)
        };
        let profile = RadialProfile::new(2, -1.0, r, u, du).unwrap();
        let tfs = euler_test_functions(1.0, &profile, 1.0, 3).unwrap();
        assert_eq!(tfs.len(), 3);
        for tf in &tfs {
            assert!(tf.q < 0.0, "Q = {} on [{}, {}]", tf.q, tf.r_lo, tf.r_hi);
        }
    });
}

// --- 10. touchdown continuation ---

#[test]
fn criterion_10_touchdown_continuation() {
    criterion(10, "touchdown continuation", || {
        let spec = ProblemSpec::power_on_ball(2, -1.0, 1.0, 1.0).unwrap();
        let dom = FdDomain::build(&spec, 33).unwrap();
        let (b_hi, b_lo, steps) = (1.05, 0.7, 12usize);
        let rows = touchdown_continuation(&spec, &dom, b_hi, b_lo, steps).unwrap();
        let ratio: f64 = (b_lo / b_hi).powf(1.0 / (steps - 1) as f64);

        // a threshold b* in (0, 1): converged rows above, failures below
        let b_ok_min = rows
            .iter()
            .filter(|r| r.status == ContinuationStatus::Ok)
            .map(|r| r.b)
            .fold(f64::INFINITY, f64::min);
        let b_fail_max = rows
            .iter()
            .filter(|r| r.status != ContinuationStatus::Ok)
            .map(|r| r.b)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(b_ok_min.is_finite(), "no converged continuation row");
        assert!(b_fail_max.is_finite() && b_fail_max < 1.0 && b_fail_max > 0.0);
        assert!(b_fail_max < b_ok_min, "failures interleave with successes");

        // min_u monotone in b over the converged prefix
        let mins: Vec<f64> = rows.iter().filter_map(|r| r.min_u).collect();
        for w in mins.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "min_u not monotone: {mins:?}");
        }

        // consistency with the radial bracket failure, within one step
        let mut lo = 0.5;
        let mut hi = 1.2;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            match solve_radial_bvp(&spec, 1.0, mid) {
                Ok(_) => hi = mid,
                Err(Error::NoSolutionInBracket) => lo = mid,
                Err(e) => panic!("unexpected radial error {e}"),
            }
        }
        let b_star_radial = 0.5 * (lo + hi);
        let b_star_cont = (b_ok_min * b_fail_max).sqrt();
        let gap = (b_star_cont / b_star_radial).ln().abs();
        assert!(
            gap <= ratio.ln().abs(),
            "continuation threshold {b_star_cont:.4} vs radial {b_star_radial:.4} \
             (gap {gap:.4} > one step {:.4})",
            ratio.ln().abs()
        );
    });
}

// --- 11. integral equation & symmetry ---

#[test]
fn criterion_11_integral_equation_and_symmetry() {
    criterion(11, "integral equation & symmetry", || {
        let kernel = RieszKernelSpec::new(2, 1.0).unwrap();
        let h = GridField::from_fn(&[17, 17], 0.1, &[-0.8, -0.8], |x| {
            5.0 + (-(x[0] * x[0] + x[1] * x[1])).exp()
        })
        .unwrap();
        let opts = PicardOptions { tol: 1e-8, ..PicardOptions::default() };
        let u = solve_integral_equation(&h, -1.0, &kernel, &opts).unwrap();
        // 0 < u <= h and the fixed-point residual is small
        for i in 0..u.len() {
            assert!(u.values[i] > 0.0 && u.values[i] <= h.values[i]);
        }
        let density =
            GridField { values: u.values.iter().map(|&v| 1.0 / v).collect(), ..u.clone() };
        let pot = selab::potential::riesz_apply(&density, &kernel).unwrap();
        let res = (0..u.len())
            .map(|i| (h.values[i] - pot.values[i] - u.values[i]).abs())
            .fold(0.0f64, f64::max);
        assert!(res < 1e-6, "fixed-point residual {res:.3e}");

        // symmetric data: symmetric solution across every center plane
        for axis in 0..2 {
            let plane = ReflectionPlane { axis, lambda: 0.0 };
            let defect = symmetry_defect(&u, &plane).unwrap();
            assert!(defect < 1e-8, "symmetry defect {defect:.3e} on axis {axis}");
        }

        // reflection residual shrinks >= 5x per 10x tolerance tightening
        let plane = ReflectionPlane { axis: 0, lambda: 0.25 };
        let residual_at = |tol: f64| {
            let opts = PicardOptions { tol, ..PicardOptions::default() };
            let u = solve_integral_equation(&h, -1.0, &kernel, &opts).unwrap();
            reflection_difference_check(&u, &h, &plane, -1.0, &kernel, false).unwrap()
        };
        let r1 = residual_at(1e-5);
        let r2 = residual_at(1e-6);
        let r3 = residual_at(1e-7);
        assert!(
            (r1 / r3).sqrt() >= 5.0,
            "reflection residuals {r1:.3e} -> {r2:.3e} -> {r3:.3e}"
        );

        // Kelvin double transform = identity
        let dims = 241;
        let hh = 3.0 / (dims as f64 - 1.0);
        let smooth = GridField::from_fn(&[dims, dims], hh, &[-1.5, -1.5], |_| 1.0).unwrap();
        let v = kelvin_transform(&smooth, 1.0).unwrap();
        let w = kelvin_transform(&v, 1.0).unwrap();
        let mut dev = 0.0f64;
        for i in 0..w.len() {
            if w.mask[i] != selab::core_model::Mask::Exterior {
                dev = dev.max((w.values[i] - smooth.values[i]).abs());
            }
        }
        assert!(dev < 1e-6, "double Kelvin deviation {dev:.3e}");

        // exponent bookkeeping
        let e = hls_exponents(3, 2.0, -1.0).unwrap();
        assert!((e.alpha - 6.0).abs() < 1e-14);
        for k in 1..=20 {
            let e = hls_exponents(3, 2.0, -(k as f64)).unwrap();
            assert!(!e.feasible.beta_exceeds_threshold, "beta condition at tau = -{k}");
        }
    });
}

// --- 12. scale invariance ---

#[test]
fn criterion_12_scale_invariance() {
    criterion(12, "scale invariance", || {
        let (n, tau, lambda) = (2usize, -1.0, 2.0);
        let u = shot_profile(n, tau, 1.0, 64.0);
        let v = rescale_blowup_profile(&u, lambda, tau).unwrap();
        let r_v = [4.0, 8.0, 16.0];
        let r_u: Vec<f64> = r_v.iter().map(|&r| lambda * r).collect();

        let rho = |rep: &auditor::AuditReport| -> Vec<f64> {
            rep.params["rho_list"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .collect()
        };
        let rep_v = l1_lower_bound_audit(&v, n, tau, &r_v).unwrap();
        let rep_u = l1_lower_bound_audit(&u, n, tau, &r_u).unwrap();
        for (a, b) in rho(&rep_v).iter().zip(rho(&rep_u).iter()) {
            assert!((a - b).abs() < 1e-8 * b.abs(), "rho mismatch {a} vs {b}");
        }

        let cs = |rep: &auditor::AuditReport| -> Vec<f64> {
            rep.params["C_list"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .collect()
        };
        let q = 2.0 / (1.0 - tau);
        let rep_v = sup_bound_audit(&v, n, q, 0.5, &r_v).unwrap();
        let rep_u = sup_bound_audit(&u, n, q, 0.5, &r_u).unwrap();
        for (a, b) in cs(&rep_v).iter().zip(cs(&rep_u).iter()) {
            assert!((a - b).abs() < 1e-8 * b.abs(), "sup constant mismatch {a} vs {b}");
        }
    });
}
