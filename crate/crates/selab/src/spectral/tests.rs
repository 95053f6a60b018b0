use super::*;
use crate::core_model::{singular_solution, stability_threshold_dim, Boundary, Source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Simple analytic radial function a·r^b for base solutions in tests.
struct PowerFn {
    a: f64,
    b: f64,
}

impl RadialFn for PowerFn {
    fn value(&self, r: f64) -> f64 {
        self.a * r.powf(self.b)
    }
    fn deriv(&self, r: f64) -> f64 {
        self.a * self.b * r.powf(self.b - 1.0)
    }
    fn r_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

fn log_spaced_profile<F: Fn(f64) -> (f64, f64)>(
    n: usize,
    tau: f64,
    r_lo: f64,
    r_hi: f64,
    samples: usize,
    f: F,
) -> RadialProfile {
    let mut r = Vec::with_capacity(samples);
    let mut u = Vec::with_capacity(samples);
    let mut du = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let ri = r_lo * (r_hi / r_lo).powf(t);
        let (ui, dui) = f(ri);
        r.push(ri);
        u.push(ui);
        du.push(dui);
    }
    RadialProfile::new(n, tau, r, u, du).unwrap()
}

#[test]
fn interval_dirichlet_sine_spectrum() {
    let op =
        LinearizedOperator::from_potential(1, 0.0, PI, true, false, 400, |_| 0.0).unwrap();
    let eigs = lowest_eigenvalues(&op, 3).unwrap();
    for (k, &lambda) in eigs.iter().enumerate() {
        let exact = ((k + 1) * (k + 1)) as f64;
        assert!(
            ((lambda - exact) / exact).abs() < 0.01,
            "lambda_{k} = {lambda}, want {exact}"
        );
    }
}

#[test]
fn constant_potential_shifts_spectrum_exactly() {
    let base =
        LinearizedOperator::from_potential(1, 0.0, PI, true, false, 120, |_| 0.0).unwrap();
    let shifted =
        LinearizedOperator::from_potential(1, 0.0, PI, true, false, 120, |_| 7.5).unwrap();
    let scale = base.norm_estimate();
    for k in 0..4 {
        let a = base.eigenvalue(k);
        let b = shifted.eigenvalue(k);
        assert!((b - a - 7.5).abs() < 1e-12 * scale, "k = {k}: {a} vs {b}");
    }
}

#[test]
fn operator_weighted_symmetry_below_1e12() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let pot: Vec<f64> = (0..300).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let op = LinearizedOperator::from_potential(3, 0.5, 4.0, true, false, 300, |r| {
        let idx = (((r - 0.5) / 3.5) * 299.0) as usize;
        pot[idx.min(299)]
    })
    .unwrap();
    assert!(op.asymmetry < 1e-12, "asymmetry = {}", op.asymmetry);

    // the symmetrized form is self-adjoint in the plain inner product
    let m = op.dim();
    let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut av = vec![0.0; m];
    let mut aw = vec![0.0; m];
    op.apply(&v, &mut av);
    op.apply(&w, &mut aw);
    let lhs: f64 = av.iter().zip(&w).map(|(&x, &y)| x * y).sum();
    let rhs: f64 = aw.iter().zip(&v).map(|(&x, &y)| x * y).sum();
    let scale = op.norm_estimate() * (m as f64).sqrt();
    assert!((lhs - rhs).abs() < 1e-12 * scale);
}

#[test]
fn tau_zero_linearization_is_the_laplacian() {
    let spec = ProblemSpec::power_on_ball(3, 0.0, 2.0, 1.0).unwrap();
    let u = PowerFn { a: 1.0, b: 0.0 };
    let op = assemble_linearized(&u, &spec, 0, 200).unwrap();
    let plain =
        LinearizedOperator::from_potential(3, 0.0, 2.0, false, false, 200, |_| 0.0).unwrap();
    for j in 0..op.dim() {
        assert!((op.diag[j] - plain.diag[j]).abs() <= 1e-12 * plain.diag[j].abs());
    }
    // and it is positive definite: no eigenvalue below 0
    assert_eq!(op.count_below(0.0), 0);
}

#[test]
fn singular_n2_mode0_potential_is_inverse_square() {
    let spec = ProblemSpec::new(
        2,
        -1.0,
        Source::power(-1.0),
        crate::core_model::Domain::Annulus { inner: 1.0, outer: 10.0 },
        Boundary::Constant(1.0),
    )
    .unwrap();
    let u = PowerFn { a: 1.0, b: 1.0 }; // the singular solution u = r
    let op = assemble_linearized(&u, &spec, 0, 300).unwrap();
    let oracle =
        LinearizedOperator::from_potential(2, 1.0, 10.0, true, true, 300, |r| -1.0 / (r * r))
            .unwrap();
    for j in 0..op.dim() {
        assert!(
            (op.diag[j] - oracle.diag[j]).abs() <= 1e-12 * oracle.diag[j].abs().max(1.0),
            "node {j}"
        );
    }
}

#[test]
fn assemble_rejects_nonpositive_base() {
    let spec = ProblemSpec::power_on_ball(2, -1.0, 1.0, 1.0).unwrap();
    let u = PowerFn { a: -1.0, b: 0.0 };
    assert!(matches!(
        assemble_linearized(&u, &spec, 0, 50),
        Err(Error::NonpositiveField(_))
    ));
}

#[test]
fn eigenpair_residual_within_bound() {
    let op =
        LinearizedOperator::from_potential(1, 0.0, 10.0, true, false, 12, |r| (3.0 * r).sin())
            .unwrap();
    for k in 0..3 {
        let (lambda, v) = op.eigenpair(k).unwrap();
        let mut av = vec![0.0; op.dim()];
        op.apply(&v, &mut av);
        let res: f64 = av
            .iter()
            .zip(&v)
            .map(|(&a, &x)| (a - lambda * x) * (a - lambda * x))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = v.iter().map(|&x| x * x).sum::<f64>().sqrt();
        assert!(res <= 1e-8 * norm, "k = {k}: residual {res}");
    }
}

#[test]
fn lowest_eigenvalues_rejects_bad_counts() {
    let op =
        LinearizedOperator::from_potential(1, 0.0, 1.0, true, false, 10, |_| 0.0).unwrap();
    assert!(matches!(lowest_eigenvalues(&op, 0), Err(Error::InvalidRange(_))));
    assert!(matches!(lowest_eigenvalues(&op, 11), Err(Error::InvalidRange(_))));
}

#[test]
fn hardy_check_examples() {
    let c = hardy_stability_check(7, -1.0);
    assert!((c.lhs - 6.0).abs() < 1e-12 && (c.rhs - 6.25).abs() < 1e-12 && c.stable);
    let c = hardy_stability_check(6, -1.0);
    assert!((c.lhs - 5.0).abs() < 1e-12 && (c.rhs - 4.0).abs() < 1e-12 && !c.stable);
    // n = 2: Hardy constant 0, never stable for tau < 0
    for tau in [-0.5, -1.0, -3.0] {
        let c = hardy_stability_check(2, tau);
        assert!(c.rhs == 0.0 && c.lhs > 0.0 && !c.stable);
    }
}

#[test]
fn hardy_flag_matches_dimension_threshold() {
    for tau in [-0.5, -1.0, -2.0, -4.0] {
        let n_star = stability_threshold_dim(tau).unwrap();
        for n in 3..=12 {
            let c = hardy_stability_check(n, tau);
            assert_eq!(
                c.stable,
                n as f64 >= n_star,
                "n = {n}, tau = {tau}, n* = {n_star}"
            );
        }
    }
}

#[test]
fn hardy_oracle_agrees_with_discrete_spectrum_at_r100() {
    for n in 3..=8 {
        for tau in [-1.0, -2.0] {
            let u = singular_solution(n, tau).unwrap().as_radial().unwrap();
            let spec = ProblemSpec::power_on_ball(n, tau, 100.0, 1.0).unwrap();
            let op = assemble_linearized(&u, &spec, 0, 3000).unwrap();
            let lambda = lowest_eigenvalues(&op, 1).unwrap()[0];
            let check = hardy_stability_check(n, tau);
            if check.stable {
                assert!(lambda >= -1e-6, "(n, tau) = ({n}, {tau}): lambda = {lambda}");
            } else {
                assert!(lambda < -1e-4, "(n, tau) = ({n}, {tau}): lambda = {lambda}");
            }
        }
    }
}

#[test]
fn stable_singular_operator_n7_r10() {
    let u = singular_solution(7, -1.0).unwrap().as_radial().unwrap();
    let spec = ProblemSpec::power_on_ball(7, -1.0, 10.0, 1.0).unwrap();
    let op = assemble_linearized(&u, &spec, 0, 2000).unwrap();
    let lambda = lowest_eigenvalues(&op, 1).unwrap()[0];
    assert!(lambda >= -1e-6, "lambda = {lambda}");
}

#[test]
fn spherical_multiplicities() {
    assert_eq!(spherical_harmonic_multiplicity(3, 0), 1);
    assert_eq!(spherical_harmonic_multiplicity(3, 1), 3);
    assert_eq!(spherical_harmonic_multiplicity(3, 2), 5);
    assert_eq!(spherical_harmonic_multiplicity(3, 3), 7);
    assert_eq!(spherical_harmonic_multiplicity(2, 1), 2);
    assert_eq!(spherical_harmonic_multiplicity(2, 5), 2);
    assert_eq!(spherical_harmonic_multiplicity(4, 2), 9);
}

#[test]
fn morse_index_zero_for_unit_source() {
    let u = PowerFn { a: 1.0, b: 0.0 };
    for big_r in [1.0, 2.0] {
        let spec = ProblemSpec::power_on_ball(3, 0.0, big_r, 1.0).unwrap();
        let report = morse_index(&u, &spec, big_r, 6, 400, None).unwrap();
        assert_eq!(report.morse_index, 0, "R = {big_r}");
        assert!(report.eigenvalues.is_empty());
    }
}

#[test]
fn morse_index_zero_for_stable_singular_n7() {
    let u = singular_solution(7, -1.0).unwrap().as_radial().unwrap();
    let spec = ProblemSpec::power_on_ball(7, -1.0, 1.0, 1.0).unwrap();
    let mut prev = 0usize;
    for big_r in [1.0, 10.0, 100.0] {
        let report = morse_index(&u, &spec, big_r, 8, 2000, None).unwrap();
        assert_eq!(report.morse_index, 0, "R = {big_r}");
        assert!(report.morse_index >= prev);
        prev = report.morse_index;
    }
}

#[test]
fn morse_index_singular_n2_counts_euler_zeros() {
    // u = r on the annulus [1, R]; the mode-0 operator is -Δ - 1/r², whose
    // negative-eigenvalue count equals the number of Euler zeros inside,
    // floor(log R / pi). Modes ℓ ≥ 1 are nonnegative and get truncated.
    let u = PowerFn { a: 1.0, b: 1.0 };
    let spec = ProblemSpec::new(
        2,
        -1.0,
        Source::power(-1.0),
        crate::core_model::Domain::Annulus { inner: 1.0, outer: 2.0 },
        Boundary::Constant(1.0),
    )
    .unwrap();
    let r1 = (2.5 * PI).exp();
    let r2 = (3.5 * PI).exp();
    let rep1 = morse_index(&u, &spec, r1, 6, 3000, Some(1e-12)).unwrap();
    let rep2 = morse_index(&u, &spec, r2, 6, 3000, Some(1e-12)).unwrap();
    assert_eq!(rep1.morse_index, 2, "eigs: {:?}", rep1.eigenvalues);
    assert_eq!(rep2.morse_index, 3, "eigs: {:?}", rep2.eigenvalues);
    assert_eq!(rep1.modes, 1);
    // index(R) >= 1 past e^{2 pi} and gains one unit per factor e^{pi}
    assert!(rep1.morse_index >= 1);
    assert!(rep2.morse_index >= rep1.morse_index + 1);
    // report consistency
    assert_eq!(rep1.eigenvalues.len(), rep1.morse_index);
    assert!(rep1.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    assert!(rep1.eigenvalues.iter().all(|&e| e < -rep1.tol_neg));
}

#[test]
fn spectrum_report_json_schema() {
    let u = PowerFn { a: 1.0, b: 0.0 };
    let spec = ProblemSpec::power_on_ball(3, 0.0, 1.0, 1.0).unwrap();
    let report = morse_index(&u, &spec, 1.0, 4, 100, None).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    for key in ["R", "eigenvalues", "morse_index", "tol_neg", "modes", "grid"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["grid"], 100);
}

#[test]
fn euler_q_vanishes_on_exact_inverse_square() {
    // p/u^{p+1} = mu/r² exactly for u = r, p = 1, mu = 1
    let profile = log_spaced_profile(2, -1.0, 1.0, 600.0, 2000, |r| (r, 1.0));
    let tfs = euler_test_functions(1.0, &profile, 1.0, 2).unwrap();
    assert_eq!(tfs.len(), 2);
    for tf in &tfs {
        assert!(tf.norm_sq > 0.0);
        assert!(tf.q.abs() < 1e-7 * tf.norm_sq, "q = {}", tf.q);
        assert!(tf.q_potential_form.abs() < 1e-9 * tf.norm_sq);
    }
    // supports are the Euler annuli
    assert!((tfs[0].r_lo - 1.0).abs() < 1e-12);
    assert!((tfs[0].r_hi - PI.exp()).abs() < 1e-9 * PI.exp());
}

#[test]
fn euler_q_negative_under_strengthened_hypothesis() {
    // p/u^{p+1} = 2 mu/r² for u = r/sqrt(2), p = 1, mu = 1:
    // Q(h) = -mu * integral of h²/r² < 0 on every annulus
    let s = 2f64.sqrt();
    let profile = log_spaced_profile(2, -1.0, 1.0, 600.0, 2000, |r| (r / s, 1.0 / s));
    let tfs = euler_test_functions(1.0, &profile, 1.0, 2).unwrap();
    for tf in &tfs {
        assert!(tf.q < 0.0, "q = {}", tf.q);
        assert!(tf.q_potential_form < 0.0);
        assert!(
            (tf.q - tf.q_potential_form).abs() < 1e-8 * tf.q.abs(),
            "gradient and potential forms disagree: {} vs {}",
            tf.q,
            tf.q_potential_form
        );
    }
}

#[test]
fn euler_supports_are_disjoint_and_orthogonal() {
    let profile = log_spaced_profile(2, -1.0, 1.0, (4.1 * PI).exp(), 4000, |r| (r, 1.0));
    let tfs = euler_test_functions(1.0, &profile, 1.0, 3).unwrap();
    assert_eq!(tfs.len(), 3);
    for w in tfs.windows(2) {
        assert!((w[0].r_hi - w[1].r_lo).abs() < 1e-9 * w[1].r_lo);
    }
    // pointwise disjointness makes every cross inner product vanish
    for i in 0..tfs.len() {
        for j in 0..tfs.len() {
            if i == j {
                continue;
            }
            let mut dot = 0.0;
            for k in 0..5000 {
                let r = 1.0 * ((4.1 * PI).exp() / 1.0).powf(k as f64 / 4999.0);
                dot += tfs[i].value(r) * tfs[j].value(r);
            }
            assert_eq!(dot, 0.0);
        }
    }
}

#[test]
fn euler_negative_q_certifies_negative_eigenvalue() {
    // min-max: lambda_min on any domain containing the support is at most
    // the Rayleigh quotient Q(h)/||h||²
    let s = 2f64.sqrt();
    let profile = log_spaced_profile(2, -1.0, 1.0, 600.0, 2000, |r| (r / s, 1.0 / s));
    let tf = &euler_test_functions(1.0, &profile, 1.0, 2).unwrap()[1];
    let op = LinearizedOperator::from_potential(
        2,
        tf.r_lo * 0.9,
        tf.r_hi * 1.1,
        true,
        true,
        2000,
        |r| -2.0 / (r * r),
    )
    .unwrap();
    let lambda = lowest_eigenvalues(&op, 1).unwrap()[0];
    let rayleigh = tf.q / tf.norm_sq;
    assert!(rayleigh < 0.0);
    assert!(
        lambda <= rayleigh + 1e-3 * rayleigh.abs(),
        "lambda = {lambda}, rayleigh = {rayleigh}"
    );
}

#[test]
fn euler_rejects_nonoscillatory_and_bad_exponent() {
    let profile = log_spaced_profile(2, -1.0, 1.0, 100.0, 200, |r| (r, 1.0));
    assert!(matches!(
        euler_test_functions(0.0, &profile, 1.0, 1),
        Err(Error::NonOscillatory(_))
    ));
    assert!(matches!(
        euler_test_functions(-1.0, &profile, 1.0, 1),
        Err(Error::NonOscillatory(_))
    ));
    // zeros beyond the sampled range
    assert!(matches!(
        euler_test_functions(1.0, &profile, 1.0, 2),
        Err(Error::InvalidRange(_))
    ));
}

#[test]
fn log_cutoff_capacity_examples() {
    let e = std::f64::consts::E;
    assert!((log_cutoff_capacity(e).unwrap() - 2.0 * PI).abs() < 1e-12);
    assert!((log_cutoff_capacity(e * e).unwrap() - PI).abs() < 1e-12);
    assert!(matches!(log_cutoff_capacity(1.0), Err(Error::InvalidRange(_))));
    assert!(matches!(log_cutoff_capacity(0.5), Err(Error::InvalidRange(_))));
    // monotone vanishing as R grows
    let mut prev = f64::INFINITY;
    for k in 1..8 {
        let v = log_cutoff_capacity((2f64).powi(k)).unwrap();
        assert!(v < prev && v > 0.0);
        prev = v;
    }
}

#[test]
fn log_cutoff_capacity_matches_quadrature() {
    // integral over B_{R²} \ B_R of |grad xi|² with xi = 2 - log r / log R:
    // 2 pi * int_R^{R²} dr / (r log²R)
    for big_r in [std::f64::consts::E, 4.0, 25.0] {
        let exact = log_cutoff_capacity(big_r).unwrap();
        let (t0, t1) = (big_r.ln(), (big_r * big_r).ln());
        let steps = 2000;
        let ht = (t1 - t0) / steps as f64;
        let mut acc = 0.0;
        for j in 0..=steps {
            let w = if j == 0 || j == steps {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            // in t = log r the integrand (1/(r log R))² · 2 pi r · r dt
            acc += w * 2.0 * PI / (big_r.ln() * big_r.ln());
        }
        acc *= ht / 3.0;
        assert!((acc - exact).abs() < 1e-10 * exact, "R = {big_r}");
    }
}
