use approx::assert_relative_eq;
use middom::ddesim::{asymptotic_window, ScenarioPair};
use middom::hypergeom::{kummer_m, HypergeomError};
use middom::rootfinder::{count_in_strip, Rectangle};
use middom::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qp(tau: f64, a: Vec<f64>, alpha: Vec<f64>) -> RetardedQuasipolynomial {
    RetardedQuasipolynomial::new(tau, a, alpha).unwrap()
}

fn rect(a: f64, b: f64, c: f64, d: f64) -> Rectangle {
    Rectangle::new(a, b, c, d).unwrap()
}

#[test]
fn eval_small_cases() {
    let q = qp(1.0, vec![-1.0], vec![1.0]);
    assert!(q.eval(c(0.0, 0.0)).norm() < 1e-15);
    assert_relative_eq!(q.eval(c(1.0, 0.0)).re, (-1.0f64).exp(), max_relative = 1e-14);
    let exact = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    assert!(exact.eval(c(-5.2, 0.0)).norm() <= 1e-12);
    // Rounding α₀ to 4 and α₁ to 4 significant digits moves Δ(−5.2) by up to
    // e^{2.6} (5e-4 + 5.2 · 5e-5).
    let printed = qp(0.5, vec![9.44, 2.4], vec![-3.327, -0.2971]);
    let rounding = 2.6f64.exp() * (5e-4 + 5.2 * 5e-5);
    assert!(printed.eval(c(-5.2, 0.0)).norm() <= rounding);
}

#[test]
fn derivative_small_cases() {
    let q = qp(1.0, vec![-1.0], vec![1.0]);
    assert!(q.eval_derivative(c(0.0, 0.0), 1).unwrap().norm() < 1e-15);
    assert_relative_eq!(q.eval_derivative(c(0.0, 0.0), 2).unwrap().re, 1.0, epsilon = 1e-15);
    let s = synthesize(2, 1.0, 0.0).unwrap().quasipolynomial();
    assert!(s.eval_derivative(c(0.0, 0.0), 3).unwrap().norm() < 1e-12);
}

#[test]
fn degree_cases() {
    assert_eq!(qp(1.0, vec![0.0; 3], vec![1.0, 0.0, 0.0]).degree(), 4);
    assert_eq!(qp(1.0, vec![6.0, -4.0], vec![-6.0, -2.0]).degree(), 4);
    assert_eq!(qp(1.0, vec![6.0, -4.0], vec![0.0, 0.0]).degree(), 2);
}

#[test]
fn strip_bounds() {
    use std::f64::consts::PI;
    let q2 = qp(1.0, vec![6.0, -4.0], vec![-6.0, -2.0]);
    let b = q2.polya_szego_bound(0.0, 0.0).unwrap();
    assert_eq!((b.lower, b.upper), (-4.0, 4.0));
    let q1 = qp(1.0, vec![-1.0], vec![1.0]);
    let b = q1.polya_szego_bound(0.0, 4.0 * PI).unwrap();
    assert_relative_eq!(b.lower, 0.0, epsilon = 1e-12);
    assert_relative_eq!(b.upper, 4.0, epsilon = 1e-12);
    let q = qp(0.5, vec![6.0, -4.0], vec![-6.0, -2.0]);
    let b = q.polya_szego_bound(-2.0 * PI, 2.0 * PI).unwrap();
    assert_relative_eq!(b.lower, -3.0, epsilon = 1e-12);
    assert_relative_eq!(b.upper, 5.0, epsilon = 1e-12);
}

#[test]
fn poly_exp_integral_cases() {
    assert_relative_eq!(poly_exp_integral(&[1.0], c(0.0, 0.0)).re, 1.0, epsilon = 1e-15);
    let v = poly_exp_integral(&[1.0, -1.0], c(1.0, 0.0));
    assert_relative_eq!(v.re, (-1.0f64).exp(), max_relative = 1e-13);
    let v = poly_exp_integral(&[0.0, 1.0, -2.0, 1.0], c(0.0, 0.0));
    assert_relative_eq!(v.re, 1.0 / 12.0, max_relative = 1e-13);
}

#[test]
fn normalized_coefficient_tables() {
    assert_eq!(normalized_coefficients(1).unwrap(), (vec![-1.0], vec![1.0]));
    assert_eq!(
        normalized_coefficients(2).unwrap(),
        (vec![6.0, -4.0], vec![-6.0, -2.0])
    );
    assert_eq!(
        normalized_coefficients(3).unwrap(),
        (vec![-60.0, 36.0, -9.0], vec![60.0, 24.0, 3.0])
    );
    assert_eq!(oracle_normalized_coefficients(1).unwrap(), (vec![-1.0], vec![1.0]));
    assert_eq!(
        oracle_normalized_coefficients(2).unwrap(),
        normalized_coefficients(2).unwrap()
    );
    let o = middom::synthesis::oracle::LinearSystemOracle::build(3).unwrap();
    assert_eq!(&o.rhs()[..3], &[0, 0, 0]);
    assert_eq!(&o.rhs()[3..], &[-6, 0, 0]);
}

#[test]
fn synthesize_cases() {
    let r = synthesize(1, 1.0, 0.0).unwrap();
    assert_eq!((r.a.clone(), r.alpha.clone()), (vec![-1.0], vec![1.0]));
    let r = synthesize(2, 0.5, -5.2).unwrap();
    assert_relative_eq!(r.a[0], 9.44, max_relative = 1e-12);
    assert_relative_eq!(r.a[1], 2.4, max_relative = 1e-12);
    assert_relative_eq!(r.alpha[0], -3.3275, max_relative = 1e-4);
    assert_relative_eq!(r.alpha[1], -0.29710, max_relative = 1e-4);
    assert!(r.stable);
    let r = synthesize(2, 1.0, 0.0).unwrap();
    assert_eq!((r.a, r.alpha), (vec![6.0, -4.0], vec![-6.0, -2.0]));
}

#[test]
fn normalization_cases() {
    let q = qp(1.0, vec![0.3, -1.2], vec![0.7, 2.0]);
    let nq = normalize(&q, 0.0);
    assert_eq!((nq.b.clone(), nq.beta.clone()), (q.a().to_vec(), q.alpha().to_vec()));
    assert_eq!(denormalize(&nq, 1.0, 0.0).unwrap(), q);

    let s = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    let nq = normalize(&s, -5.2);
    for (x, y) in nq.b.iter().zip([6.0, -4.0]) {
        assert_relative_eq!(*x, y, max_relative = 1e-12);
    }
    for (x, y) in nq.beta.iter().zip([-6.0, -2.0]) {
        assert_relative_eq!(*x, y, max_relative = 1e-12);
    }

    let nq = NormalizedQuasipolynomial {
        b: vec![6.0, -4.0],
        beta: vec![-6.0, -2.0],
    };
    let back = denormalize(&nq, 0.5, -5.2).unwrap();
    assert_relative_eq!(back.a()[0], 9.44, max_relative = 1e-12);
    assert_relative_eq!(back.a()[1], 2.4, max_relative = 1e-12);
    assert_relative_eq!(back.alpha()[0], -3.3275, max_relative = 1e-4);
    assert_relative_eq!(back.alpha()[1], -0.29710, max_relative = 1e-4);
}

#[test]
fn multiplicity_cases() {
    let s = synthesize(3, 1.0, 0.0).unwrap().quasipolynomial();
    assert_eq!(certify_multiplicity(&s, 0.0, 1e-8).unwrap(), 6);
    let simple = qp(1.0, vec![0.0], vec![0.0]);
    assert_eq!(certify_multiplicity(&simple, 0.0, 1e-8).unwrap(), 1);
    let s = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    assert_eq!(certify_multiplicity(&s, -5.2, 1e-8).unwrap(), 4);
}

#[test]
fn dominant_root_cases() {
    assert_relative_eq!(dominant_root_from_coeff(2, 0.5, 2.4), -5.2, max_relative = 1e-14);
    assert_eq!(dominant_root_from_coeff(1, 1.0, -1.0), 0.0);
    assert_eq!(dominant_root_from_coeff(3, 2.0, 0.0), -1.5);
}

#[test]
fn binomial_small_sums() {
    use middom::synthesis::binomial::binom_i;
    let sign = |k: i64| if k % 2 == 0 { 1i128 } else { -1 };
    let (j, k) = (5i64, 5i64);
    let kron: i128 = (0..=k).map(|i| sign(i + j) * binom_i(k, i) * binom_i(i, j)).sum();
    assert_eq!(kron, 1);
    let (n, j, k) = (4i64, 2i64, 1i64);
    let s: i128 = (0..=k)
        .map(|l| sign(l) * binom_i(n + k - j, l) * binom_i(n + k - l, n))
        .sum();
    assert_eq!(s, 2);
    let partial: i128 = (0..=2).map(|j| sign(j) * binom_i(5, j)).sum();
    assert_eq!(partial, 6);
    assert_eq!(binom_i(4, 2), 6);
    let report = binomial_suite(30).unwrap();
    assert!(report.cases_checked > 0);
}

#[test]
fn kummer_cases() {
    for &(a, b) in &[(1.0, 2.0), (0.3, 5.5), (-2.5, 1.5)] {
        let v = kummer_m(&KummerParams::new(a, b), c(0.0, 0.0)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }
    let e1 = std::f64::consts::E - 1.0;
    let v = kummer_m(&KummerParams::new(1.0, 2.0), c(1.0, 0.0)).unwrap();
    assert_relative_eq!(v.re, e1, max_relative = 1e-14);
    let s = kummer_m(&KummerParams::new(2.0, 5.0), c(-3.0, 0.0)).unwrap();
    let i = kummer_integral(2.0, 5.0, c(-3.0, 0.0)).unwrap();
    assert!((s - i).norm() <= 1e-8 * s.norm());

    assert_relative_eq!(kummer_integral(1.0, 2.0, c(0.0, 0.0)).unwrap().re, 1.0, max_relative = 1e-13);
    assert_relative_eq!(kummer_integral(1.0, 2.0, c(1.0, 0.0)).unwrap().re, e1, max_relative = 1e-13);
    let s = kummer_m(&KummerParams::new(3.0, 7.0), c(2.0, 0.0)).unwrap();
    let i = kummer_integral(3.0, 7.0, c(2.0, 0.0)).unwrap();
    assert!((s - i).norm() <= 1e-8 * s.norm());
}

#[test]
fn factored_form_cases() {
    let v = factored_delta(1, c(1.0, 0.0)).unwrap();
    assert_relative_eq!(v.re, (-1.0f64).exp(), max_relative = 1e-13);
    assert_eq!(factored_delta(1, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    let f = factored_delta(2, c(2.0, 0.0)).unwrap();
    let d = qp(1.0, vec![6.0, -4.0], vec![-6.0, -2.0]).eval(c(2.0, 0.0));
    assert!((f - d).norm() <= 1e-10 * d.norm());
}

#[test]
fn wynn_cases() {
    let k = middom::rootfinder::KummerFunction {
        params: KummerParams::new(1.0, 3.0),
    };
    let zeros = middom::rootfinder::find_zeros(&k, &rect(0.1, 30.0, -30.0, 30.0), 1e-10).unwrap();
    let roots: Vec<Complex64> = zeros.roots.iter().map(|r| r.location()).collect();
    assert!(!roots.is_empty());
    assert_eq!(wynn_root_sides(1.0, WynnFamily::Balanced, &roots), Ok(roots.len()));
    assert_eq!(wynn_root_sides(1.0, WynnFamily::Balanced, &[]), Ok(0));
    assert_eq!(
        wynn_root_sides(1.0, WynnFamily::Balanced, &[c(-1.0, 0.0)]),
        Err(HypergeomError::SideViolation(vec![c(-1.0, 0.0)]))
    );
}

#[test]
fn count_roots_cases() {
    let s = synthesize(1, 1.0, 0.0).unwrap().quasipolynomial();
    assert_eq!(count_roots(&s, &rect(-1.0, 1.0, -1.0, 1.0)).unwrap(), 2);
    let s = synthesize(2, 1.0, 0.0).unwrap().quasipolynomial();
    assert_eq!(count_roots(&s, &rect(-0.5, 0.5, -0.5, 0.5)).unwrap(), 4);
    let osc = qp(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
    assert_eq!(count_roots(&osc, &rect(-2.0, 2.0, -2.0, 2.0)).unwrap(), 2);
}

#[test]
fn find_roots_order_one() {
    let s = synthesize(1, 1.0, 0.0).unwrap().quasipolynomial();
    let report = find_roots(&s, &rect(-8.0, 2.0, -30.0, 30.0), 1e-10).unwrap();
    assert!(report.is_complete(), "{report:?}");
    let zero: Vec<_> = report.roots.iter().filter(|r| r.location().norm() < 1e-6).collect();
    assert_eq!(zero.len(), 1);
    assert_eq!(zero[0].multiplicity, 2);
    for r in report.roots.iter().filter(|r| r.location().norm() >= 1e-6) {
        assert!(r.re < 0.0);
        assert!(r.im != 0.0);
        assert!(report
            .roots
            .iter()
            .any(|o| (o.location() - r.location().conj()).norm() < 1e-7));
    }
}

#[test]
fn find_roots_oscillator() {
    let osc = qp(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
    let report = find_roots(&osc, &rect(-2.0, 2.0, -2.0, 2.0), 1e-10).unwrap();
    assert_eq!(report.roots.len(), 2);
    assert!((report.roots[0].location() - c(0.0, -1.0)).norm() < 1e-9);
    assert!((report.roots[1].location() - c(0.0, 1.0)).norm() < 1e-9);
    assert!(report.roots.iter().all(|r| r.multiplicity == 1));
}

#[test]
fn find_roots_second_order_design() {
    let s = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    let report = find_roots(&s, &rect(-30.0, 0.0, -60.0, 60.0), 1e-10).unwrap();
    assert!(report.is_complete(), "{report:?}");
    let dom: Vec<_> = report
        .roots
        .iter()
        .filter(|r| (r.location() - c(-5.2, 0.0)).norm() < 1e-3)
        .collect();
    assert_eq!(dom.len(), 1);
    assert_eq!(dom[0].multiplicity, 4);
    for r in &report.roots {
        if (r.location() - c(-5.2, 0.0)).norm() >= 1e-3 {
            assert!(r.re < -5.2, "{r:?}");
        }
    }
}

#[test]
fn dominance_cases() {
    let s = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    let r = verify_dominance(&s, -5.2, 120.0).unwrap();
    assert!(r.dominant);
    assert_eq!(r.multiplicity, 4);
    let s = synthesize(1, 1.0, 1.0).unwrap().quasipolynomial();
    assert!(verify_dominance(&s, 1.0, 40.0).unwrap().dominant);
    let shifted = qp(1.0, vec![-1.0], vec![0.0]);
    assert_eq!(verify_dominance(&shifted, 0.0, 10.0), Err(RootError::NotARoot(0.0)));
}

#[test]
fn spectral_abscissa_cases() {
    let d = design_second_order(0.2, 6.0, 0.5).unwrap();
    let search = [rect(-10.0, 5.0, -20.0, 20.0)];
    assert_relative_eq!(
        spectral_abscissa(&d.open_loop(), &search, 1e-10).unwrap(),
        -1.2,
        max_relative = 1e-9
    );
    let search = [rect(-30.0, -10.0, -60.0, 60.0), rect(-10.0, 5.0, -60.0, 60.0)];
    let g = spectral_abscissa(&d.closed_loop(), &search, 1e-10).unwrap();
    assert!((g + 5.2).abs() < 1e-4, "{g}");
    let osc = qp(1.0, vec![1.0, 0.0], vec![0.0, 0.0]);
    let g = spectral_abscissa(&osc, &[rect(-2.0, 2.0, -2.0, 2.0)], 1e-10).unwrap();
    assert!(g.abs() < 1e-10);
}

#[test]
fn strip_count_matches_bound() {
    let s = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    let sc = count_in_strip(&s, -20.0, 20.0).unwrap();
    assert!(sc.bound.contains(sc.count), "{sc:?}");
}

fn second_order() -> ScenarioPair {
    build_scenario(Scenario::SecondOrderVelocityDelay, 40.0, 0.002).unwrap()
}

#[test]
fn delay_free_scalar_decay() {
    let spec = SimulationSpec::with_output_step(
        qp(1.0, vec![1.0], vec![0.0]),
        History::Constant(vec![1.0]),
        1.0,
        0.01,
    );
    let t = simulate(&spec).unwrap();
    assert_relative_eq!(*t.y.last().unwrap(), (-1.0f64).exp(), epsilon = 1e-8);
}

#[test]
fn second_order_open_loop_decay() {
    let pair = second_order();
    let t = simulate(&pair.open_loop).unwrap();
    let rate = fit_decay_rate(&t, 2.0, 20.0).unwrap();
    assert!((rate + 1.2).abs() < 0.01, "{rate}");
}

#[test]
fn second_order_closed_loop_decay() {
    let pair = second_order();
    assert_eq!(
        pair.closed_loop.qp,
        synthesize(2, 0.5, -5.2).unwrap().quasipolynomial()
    );
    let t = simulate(&pair.closed_loop).unwrap();
    let (t0, t1) = asymptotic_window(2, pair.s0);
    let rate = fit_decay_rate(&t, t0, t1).unwrap();
    assert!((rate + 5.2).abs() < 0.05 * 5.2, "{rate}");
}

/// On a short window early in the transient the `t³` factor of the quadruple
/// root still dominates the log-slope, so the fitted rate sits well above `s₀`.
#[test]
fn second_order_closed_loop_short_window_bias() {
    let pair = second_order();
    let t = simulate(&pair.closed_loop).unwrap();
    let rate = fit_decay_rate(&t, 0.8, 2.5).unwrap();
    assert!(rate > -5.2 && rate < -2.0, "{rate}");
}

#[test]
fn fit_decay_rate_cases() {
    let times: Vec<f64> = (0..=5000).map(|i| i as f64 * 0.001).collect();
    let y: Vec<f64> = times.iter().map(|t| (-1.2 * t).exp() * (5.9 * t).cos()).collect();
    let trace = SimulationTrace {
        times: times.clone(),
        y: y.clone(),
        y_full: vec![y],
        rk_dt: 0.001,
        dt: 0.001,
        history: "synthetic".into(),
        blew_up: false,
        fitted_rate: None,
    };
    let rate = fit_decay_rate(&trace, 1.0, 5.0).unwrap();
    assert!((rate + 1.2).abs() < 0.02, "{rate}");

    let ones = vec![1.0; times.len()];
    let flat = SimulationTrace {
        y: ones.clone(),
        y_full: vec![ones],
        ..trace
    };
    assert!(fit_decay_rate(&flat, 1.0, 5.0).unwrap().abs() < 1e-9);
}

#[test]
fn scenario_builders() {
    let pair = build_scenario(Scenario::SecondOrderVelocityDelay, 3.0, 0.002).unwrap();
    let q = &pair.closed_loop.qp;
    assert_eq!(q.tau(), 0.5);
    assert_relative_eq!(q.a()[0], 9.44, max_relative = 1e-12);
    assert_relative_eq!(q.a()[1], 2.4, max_relative = 1e-12);
    assert_relative_eq!(q.alpha()[0], -3.3275, max_relative = 1e-4);
    assert_relative_eq!(q.alpha()[1], -0.29710, max_relative = 1e-4);

    let pair = build_scenario(Scenario::WindTunnelRow1, 5.0, 0.001).unwrap();
    assert!((pair.s0 + 6.021).abs() < 5e-4);
    let d = design_wind_tunnel(1.964, -0.67036, 0.33, 0.33).unwrap();
    assert!((d.zeta - 0.3902).abs() < 5e-5);
    assert!((d.omega - 5.020).abs() < 5e-4);

    let pair = build_scenario(Scenario::WindTunnelRow2, 5.0, 0.001).unwrap();
    assert!((pair.s0 + 4.041).abs() < 5e-4);
    let d = design_wind_tunnel(1.964, -0.67036, 0.33, 0.70).unwrap();
    assert!((d.beta2 - 0.01226).abs() < 5e-6);
    assert_eq!(
        "nope".parse::<Scenario>(),
        Err(SimError::UnknownScenario("nope".into()))
    );
}

#[test]
fn second_order_design_cases() {
    let d = design_second_order(0.2, 6.0, 0.5).unwrap();
    assert_relative_eq!(d.s0, -5.2, max_relative = 1e-14);
    assert_relative_eq!(d.a0, -26.56, max_relative = 1e-12);
    assert_relative_eq!(d.alpha1, -0.29710, max_relative = 1e-4);
    assert_relative_eq!(d.alpha0, -3.3275, max_relative = 1e-4);
    let d = design_second_order(0.5, 2.0, 1.0).unwrap();
    assert_relative_eq!(d.s0, -3.0, max_relative = 1e-14);
    assert_relative_eq!(d.a0, -1.0, max_relative = 1e-12);
}

#[test]
fn r0_properties() {
    let r = real_root_r0();
    assert!((r - (-3.0 - 9f64.cbrt() + 3f64.cbrt())).abs() < 1e-14);
    assert!((((r + 9.0) * r + 36.0) * r + 60.0).abs() < 1e-12);
    assert!(3.0 * (r * r + 6.0 * r + 12.0) > 0.0);
}

#[test]
fn wind_tunnel_table() {
    let rows = [
        (0.33, [-6.021, 0.3902, 5.020, 1.542, 0.2401, 0.00994]),
        (0.70, [-4.041, 0.4368, 3.292, 0.8161, 0.1943, 0.01226]),
    ];
    for (tau1, expected) in rows {
        let d = design_wind_tunnel(1.964, -0.67036, 0.33, tau1).unwrap();
        let got = [d.s0, d.zeta, d.omega, d.beta0, d.beta1, d.beta2];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() / e.abs() < 1e-3, "tau1={tau1}: {g} vs {e}");
        }
    }
}

#[test]
fn extended_eval_near_tenfold_root() {
    let (b, beta) = normalized_coefficients(5).unwrap();
    let q = qp(1.0, b, beta);
    let z = c(-0.512_820_512_820_514_6, -0.512_820_512_820_514_6);
    // 40-digit reference value
    let reference = c(-3.970_986_011_734_268_2e-7, 1.632_960_959_280_721_6e-6);
    assert!((q.eval_extended(z) - reference).norm() <= 1e-15 * reference.norm());
    assert!((q.eval(z) - reference).norm() > 1e-8 * reference.norm());
}
