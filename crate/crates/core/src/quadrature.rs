//! Adaptive Gauss–Legendre quadrature for smooth complex-valued integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

const ORDER: usize = 15;
const MAX_DEPTH: usize = 48;
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(ORDER))
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Panel value and the same rule applied to `|f|`.
fn panel<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> (Complex64, f64) {
    let (nodes, weights) = rule();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(mid + half * x);
        acc += *w * v;
        mag += w * v.norm();
    }
    (acc * half, mag * half.abs())
}

/// `∫_lo^hi f(t) dt` to absolute tolerance `tol` by recursive bisection.
///
/// A panel is also accepted once its error estimate is at round-off level
/// relative to `∫|f|` over the whole interval, so tolerances below what
/// double precision can deliver do not force a full-depth subdivision.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, tol: f64) -> Complex64 {
    let (whole, mag) = panel(&f, lo, hi);
    let floor = ROUNDOFF * mag;
    recurse(&f, lo, hi, whole, tol, floor, 0)
}

fn recurse<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    whole: Complex64,
    tol: f64,
    floor: f64,
    depth: usize,
) -> Complex64 {
    let mid = 0.5 * (lo + hi);
    let (left, _) = panel(f, lo, mid);
    let (right, _) = panel(f, mid, hi);
    let refined = left + right;
    let err = (refined - whole).norm();
    if err <= tol.max(floor) || depth >= MAX_DEPTH {
        return refined;
    }
    recurse(f, lo, mid, left, 0.5 * tol, floor, depth + 1)
        + recurse(f, mid, hi, right, 0.5 * tol, floor, depth + 1)
}
