use middom::hypergeom::{kummer_series, kummer_m_with_magnitude};
use middom::quadrature;
use middom::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

prop_compose! {
    fn arb_qp()(n in 1usize..=4)(
        tau in 0.1f64..2.0,
        a in prop::collection::vec(-2.0f64..2.0, n),
        alpha in prop::collection::vec(-2.0f64..2.0, n),
    ) -> RetardedQuasipolynomial {
        RetardedQuasipolynomial::new(tau, a, alpha).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zeroth_derivative_is_eval(q in arb_qp(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let s = c(re, im);
        prop_assert_eq!(q.eval_derivative(s, 0).unwrap(), q.eval(s));
    }

    #[test]
    fn derivatives_match_central_differences(
        q in arb_qp(),
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
        k in 1usize..=4,
    ) {
        let s = c(re, im);
        let h = 1e-5;
        let up = q.eval_derivative(s + h, k - 1).unwrap();
        let down = q.eval_derivative(s - h, k - 1).unwrap();
        let fd = (up - down) / (2.0 * h);
        let exact = q.eval_derivative(s, k).unwrap();
        prop_assert!((exact - fd).norm() <= 1e-6 * (1.0 + exact.norm()), "{} vs {}", exact, fd);
    }

    #[test]
    fn poly_exp_integral_matches_quadrature(
        p in prop::collection::vec(-3.0f64..3.0, 1..=9),
        r in 0.0f64..50.0,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let z = Complex64::from_polar(r, theta);
        let closed = poly_exp_integral(&p, z);
        let horner = |t: f64| p.iter().rev().fold(0.0, |acc, x| acc * t + x);
        let numeric = quadrature::integrate(|t| horner(t) * (-z * t).exp(), 0.0, 1.0, 1e-15);
        let scale = quadrature::integrate(
            |t| Complex64::new(horner(t).abs() * (-z.re * t).exp(), 0.0),
            0.0,
            1.0,
            1e-15,
        )
        .re;
        prop_assert!((closed - numeric).norm() <= 1e-10 * scale, "z={} {} vs {}", z, closed, numeric);
    }

    #[test]
    fn normalize_is_pointwise_rescaling(
        q in arb_qp(),
        s0 in -2.0f64..2.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let nq = normalize(&q, s0);
        let tilde = nq.as_quasipolynomial().unwrap();
        let z = c(re, im);
        let tau = q.tau();
        let n = q.n() as i32;
        let s = c(s0, 0.0) + z / tau;
        let lhs = tilde.eval(z);
        let rhs = tau.powi(n) * q.eval(s);
        let scale = tilde.derivative_magnitude(z, 0).unwrap()
            + tau.powi(n) * q.derivative_magnitude(s, 0).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn denormalize_inverts_normalize(q in arb_qp(), s0 in -2.0f64..2.0) {
        let back = denormalize(&normalize(&q, s0), q.tau(), s0).unwrap();
        for (x, y) in back.a().iter().zip(q.a()).chain(back.alpha().iter().zip(q.alpha())) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn json_round_trip(q in arb_qp()) {
        prop_assert_eq!(RetardedQuasipolynomial::from_json(&q.to_json()).unwrap(), q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn synthesized_root_has_full_multiplicity(
        n in 1usize..=8,
        tau in 0.1f64..5.0,
        s0 in -5.0f64..5.0,
    ) {
        let q = synthesize(n, tau, s0).unwrap().quasipolynomial();
        prop_assert_eq!(certify_multiplicity(&q, s0, 1e-8).unwrap(), 2 * n);
    }

    #[test]
    fn normalizing_a_synthesis_recovers_the_table(
        n in 1usize..=8,
        tau in 0.1f64..5.0,
        s0 in -5.0f64..5.0,
    ) {
        let r = synthesize(n, tau, s0).unwrap();
        let nq = normalize(&r.quasipolynomial(), s0);
        let (b, beta) = normalized_coefficients(n).unwrap();
        for (x, y) in nq.b.iter().zip(&b).chain(nq.beta.iter().zip(&beta)) {
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0), "{} vs {}", x, y);
        }
    }

    #[test]
    fn stable_flag_agrees_with_both_criteria(
        n in 1usize..=8,
        tau in 0.1f64..5.0,
        s0 in -5.0f64..5.0,
    ) {
        prop_assume!(s0.abs() > 1e-9);
        let r = synthesize(n, tau, s0).unwrap();
        let nf = n as f64;
        let by_coefficient = r.a[n - 1] > -nf * nf / tau;
        prop_assert_eq!(r.stable, s0 < 0.0);
        prop_assert_eq!(r.stable, by_coefficient);
    }

    #[test]
    fn single_coefficient_perturbation_breaks_multiplicity(
        n in 1usize..=6,
        tau in 0.1f64..5.0,
        s0 in -5.0f64..5.0,
        which in 0usize..12,
    ) {
        let r = synthesize(n, tau, s0).unwrap();
        let (mut a, mut alpha) = (r.a.clone(), r.alpha.clone());
        let idx = which % (2 * n);
        let slot = if idx < n { &mut a[idx] } else { &mut alpha[idx - n] };
        *slot = if *slot == 0.0 { 1e-3 } else { *slot * (1.0 + 1e-3) };
        let q = RetardedQuasipolynomial::new(tau, a, alpha).unwrap();
        prop_assert!(certify_multiplicity(&q, s0, 1e-8).unwrap() < 2 * n);
    }
}

fn kummer_derivatives(a: f64, b: f64, z: Complex64) -> (Complex64, Complex64, Complex64) {
    let p = KummerParams::new(a, b);
    let m = kummer_m(&p, z).unwrap();
    let m1 = kummer_m(&KummerParams::new(a + 1.0, b + 1.0), z).unwrap() * (a / b);
    let m2 = kummer_m(&KummerParams::new(a + 2.0, b + 2.0), z).unwrap()
        * (a * (a + 1.0) / (b * (b + 1.0)));
    (m, m1, m2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kummer_equation_residual(
        a in 0.1f64..6.0,
        gap in 0.1f64..6.0,
        r in 0.0f64..10.0,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let b = a + gap;
        let z = Complex64::from_polar(r, theta);
        let (m, m1, m2) = kummer_derivatives(a, b, z);
        let residual = z * m2 + (b - z) * m1 - a * m;
        prop_assert!(residual.norm() <= 1e-7 * (1.0 + m.norm()), "{}", residual);
    }

    #[test]
    fn series_agrees_with_integral(
        a in 0.1f64..6.0,
        gap in 0.1f64..6.0,
        r in 0.0f64..10.0,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let b = a + gap;
        let z = Complex64::from_polar(r, theta);
        let s = kummer_m(&KummerParams::new(a, b), z).unwrap();
        let i = kummer_integral(a, b, z).unwrap();
        prop_assert!((s - i).norm() <= 1e-8 * s.norm(), "{} vs {}", s, i);
    }

    #[test]
    fn transformation_matches_direct_series(
        a in 0.1f64..4.0,
        gap in 0.1f64..4.0,
        re in -8.0f64..0.0,
        im in -8.0f64..8.0,
    ) {
        let p = KummerParams::new(a, a + gap);
        let z = c(re, im);
        let direct = kummer_series(&p, z).unwrap();
        let transformed = kummer_m_with_magnitude(&p, z).unwrap();
        let err = (direct.value - transformed.value).norm();
        prop_assert!(err <= 1e-13 * direct.magnitude.max(1.0), "{}", err);
    }
}

#[test]
fn factored_form_on_grid() {
    for n in 1..=5 {
        let (b, beta) = normalized_coefficients(n).unwrap();
        let q = RetardedQuasipolynomial::new(1.0, b, beta).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let z = c(-20.0 + 40.0 * i as f64 / 39.0, -20.0 + 40.0 * j as f64 / 39.0);
                let direct = q.eval_extended(z);
                let factored = factored_delta(n, z).unwrap();
                assert!(
                    (direct - factored).norm() <= 1e-8 * direct.norm(),
                    "n={n} z={z}: {direct} vs {factored}"
                );
            }
        }
    }
}

#[test]
fn oracle_matches_closed_form_exactly() {
    for n in 1..=12 {
        assert_eq!(
            oracle_normalized_coefficients(n).unwrap(),
            normalized_coefficients(n).unwrap(),
            "n={n}"
        );
    }
}
