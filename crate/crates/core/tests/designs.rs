use std::f64::consts::PI;

use middom::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_second_order_designs_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let zeta = rng.random_range(0.05..0.95);
        let omega = rng.random_range(0.5..10.0);
        let tau = rng.random_range(0.1..2.0);
        let d = design_second_order(zeta, omega, tau).unwrap();
        let q = d.closed_loop();
        assert_eq!(certify_multiplicity(&q, d.s0, 1e-8).unwrap(), 4, "{d:?}");
        let report = verify_dominance(&q, d.s0, 40.0 * PI / tau).unwrap();
        assert!(report.dominant, "{d:?} {report:?}");
    }
}

#[test]
fn perturbed_wind_tunnel_designs_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let nominal = [(1.964, -0.67036, 0.33, 0.33), (1.964, -0.67036, 0.33, 0.70)];
    let mut checked = 0;
    for i in 0..10 {
        let (kappa, k, tau0, tau1) = nominal[i % 2];
        let mut jitter = || rng.random_range(0.7..1.3);
        let d = design_wind_tunnel(kappa * jitter(), k * jitter(), tau0 * jitter(), tau1 * jitter()).unwrap();
        let q = d.closed_loop();
        assert_eq!(certify_multiplicity(&q, d.s0, 1e-8).unwrap(), 6, "{d:?}");
        let report = verify_dominance(&q, d.s0, 40.0 * PI / d.tau).unwrap();
        assert!(report.dominant, "{d:?} {report:?}");
        assert_eq!(d.zeta_in_unit_interval, d.zeta > 0.0 && d.zeta < 1.0);
        checked += 1;
    }
    assert_eq!(checked, 10);
}

#[test]
fn wind_tunnel_root_moves_right_with_longer_delay() {
    let mut last = f64::NEG_INFINITY;
    for i in 0..30 {
        let tau1 = 0.1 + 0.05 * i as f64;
        let d = design_wind_tunnel(1.964, -0.67036, 0.33, tau1).unwrap();
        assert!(d.s0 > last, "tau1={tau1}");
        assert!(d.s0 < -1.0 / 1.964);
        last = d.s0;
    }
}

#[test]
fn design_inputs_are_validated() {
    assert!(matches!(
        design_second_order(0.0, 6.0, 0.5),
        Err(DesignError::InvalidParameter { name: "zeta", .. })
    ));
    assert!(matches!(
        design_second_order(0.2, 6.0, f64::NAN),
        Err(DesignError::InvalidParameter { name: "tau", .. })
    ));
    assert!(matches!(
        design_wind_tunnel(1.964, 0.67036, 0.33, 0.33),
        Err(DesignError::InvalidParameter { name: "k_gain", .. })
    ));
}

#[test]
fn controller_table_exports() {
    let d = design_wind_tunnel(1.964, -0.67036, 0.33, 0.33).unwrap();
    let table = d.table();
    assert_eq!(table.len(), 11);
    let csv = middom::export::controller_csv(&d).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), 11);
    let json = serde_json::to_string(&d).unwrap();
    let back: ControllerDesign = serde_json::from_str(&json).unwrap();
    assert_eq!(back, d);
}

#[test]
fn spectrum_plot_and_csv() {
    let q = synthesize(2, 0.5, -5.2).unwrap().quasipolynomial();
    let report = find_roots(&q, &Rectangle::new(-30.0, 5.0, -40.0, 40.0).unwrap(), 1e-8).unwrap();
    let csv = middom::export::spectrum_csv(&report).unwrap();
    assert!(csv.starts_with("re,im,multiplicity,residual"));
    assert_eq!(csv.lines().count(), report.roots.len() + 1);
    let points: Vec<(f64, f64, usize)> = report.roots.iter().map(|r| (r.re, r.im, r.multiplicity)).collect();
    let svg = middom::svg::scatter_plot(
        "spectrum",
        &[middom::svg::PointSet {
            label: "roots",
            points: &points,
        }],
    );
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), points.len());
}
