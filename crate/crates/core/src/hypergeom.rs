//! Kummer's confluent hypergeometric function and the factorized form of the
//! normalized MID quasipolynomial.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::quadrature;
use crate::synthesis::binomial::falling_f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypergeomError {
    #[error("b = {0} is a non-positive integer")]
    PoleInB(f64),
    #[error("parameters must be finite")]
    NonFinite,
    #[error("series did not converge within {0} terms")]
    NoConvergence(usize),
    #[error("integral representation requires b > a > 0, got a = {a}, b = {b}")]
    IntegralDomain { a: f64, b: f64 },
    #[error("order n must be at least 1")]
    ZeroOrder,
    #[error("Wynn side check requires a > -1/2, got {0}")]
    WynnDomain(f64),
    #[error("{} root(s) lie on the wrong side of the imaginary axis", .0.len())]
    SideViolation(Vec<Complex64>),
}

/// Parameters of `M(a, b, ·)` together with the series controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KummerParams {
    pub a: f64,
    pub b: f64,
    pub max_terms: usize,
    pub rel_tol: f64,
}

impl KummerParams {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            max_terms: 2000,
            rel_tol: 1e-17,
        }
    }

    fn validate(&self) -> Result<(), HypergeomError> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(HypergeomError::NonFinite);
        }
        if self.b <= 0.0 && self.b == self.b.round() {
            return Err(HypergeomError::PoleInB(self.b));
        }
        Ok(())
    }
}

/// Value of a series together with the sum of the moduli of its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub magnitude: f64,
}

/// `M(a, b, z) = Σ (a)_k / (b)_k · z^k / k!` summed directly.
///
/// Terms are accumulated until three consecutive terms fall below
/// `rel_tol · |sum|` while shrinking.
pub fn kummer_series(p: &KummerParams, z: Complex64) -> Result<SeriesValue, HypergeomError> {
    p.validate()?;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut magnitude = 1.0;
    let mut small = 0;
    for k in 0..p.max_terms {
        let kf = k as f64;
        let ratio = z * ((p.a + kf) / ((p.b + kf) * (kf + 1.0)));
        term *= ratio;
        sum += term;
        magnitude += term.norm();
        if term.norm() <= p.rel_tol * sum.norm() && ratio.norm() < 1.0 {
            small += 1;
            if small >= 3 {
                return Ok(SeriesValue {
                    value: sum,
                    magnitude,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(HypergeomError::NoConvergence(p.max_terms))
}

/// `M(a, b, z)`, evaluated through Kummer's transformation
/// `M(a, b, z) = e^z M(b − a, b, −z)` when `Re z < 0` so that the series has
/// no cancellation.
pub fn kummer_m(p: &KummerParams, z: Complex64) -> Result<Complex64, HypergeomError> {
    kummer_m_with_magnitude(p, z).map(|v| v.value)
}

/// [`kummer_m`] together with the absolute term sum of the series used.
pub fn kummer_m_with_magnitude(
    p: &KummerParams,
    z: Complex64,
) -> Result<SeriesValue, HypergeomError> {
    if z.re < 0.0 {
        let flipped = KummerParams { a: p.b - p.a, ..*p };
        let inner = kummer_series(&flipped, -z)?;
        let e = z.exp();
        Ok(SeriesValue {
            value: e * inner.value,
            magnitude: e.norm() * inner.magnitude,
        })
    } else {
        kummer_series(p, z)
    }
}

/// `M(a, b, z) = Γ(b) / (Γ(a) Γ(b − a)) ∫₀¹ e^{zt} t^{a−1} (1 − t)^{b−a−1} dt`
/// for `b > a > 0`.
///
/// The interval is split at `1/2`; on each half an endpoint singularity with
/// exponent below zero is removed by the substitution `u = t^a` or
/// `v = (1 − t)^{b−a}`.
pub fn kummer_integral(a: f64, b: f64, z: Complex64) -> Result<Complex64, HypergeomError> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(HypergeomError::IntegralDomain { a, b });
    }
    let c = b - a;
    let tol = 1e-15;
    let left = if a < 1.0 {
        let hi = 0.5f64.powf(a);
        quadrature::integrate(
            |u| {
                let t = u.powf(1.0 / a);
                (z * t).exp() * (1.0 - t).powf(c - 1.0) / a
            },
            0.0,
            hi,
            tol,
        )
    } else {
        quadrature::integrate(
            |t| (z * t).exp() * t.powf(a - 1.0) * (1.0 - t).powf(c - 1.0),
            0.0,
            0.5,
            tol,
        )
    };
    let right = if c < 1.0 {
        let hi = 0.5f64.powf(c);
        quadrature::integrate(
            |v| {
                let t = 1.0 - v.powf(1.0 / c);
                (z * t).exp() * t.powf(a - 1.0) / c
            },
            0.0,
            hi,
            tol,
        )
    } else {
        quadrature::integrate(
            |t| (z * t).exp() * t.powf(a - 1.0) * (1.0 - t).powf(c - 1.0),
            0.5,
            1.0,
            tol,
        )
    };
    let prefactor = (ln_gamma(b) - ln_gamma(a) - ln_gamma(c)).exp();
    Ok(prefactor * (left + right))
}

/// `z^{2n} · n!/(2n)! · M(n, 2n + 1, −z)`, which coincides with the normalized
/// MID quasipolynomial of order `n` evaluated at `z`.
pub fn factored_delta(n: usize, z: Complex64) -> Result<Complex64, HypergeomError> {
    if n == 0 {
        return Err(HypergeomError::ZeroOrder);
    }
    let nu = n as u64;
    let p = KummerParams::new(n as f64, (2 * n + 1) as f64);
    let m = kummer_m(&p, -z)?;
    Ok(z.powu(2 * n as u32) * m / falling_f64(2 * nu, nu))
}

/// The two families whose roots lie on opposite sides of the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WynnFamily {
    /// `M(a, 2a + 1, ·)`: every root has positive real part.
    Balanced,
    /// `M(a + 1, 2a + 1, ·)`: every root has negative real part.
    Shifted,
}

impl WynnFamily {
    pub fn params(self, a: f64) -> KummerParams {
        match self {
            WynnFamily::Balanced => KummerParams::new(a, 2.0 * a + 1.0),
            WynnFamily::Shifted => KummerParams::new(a + 1.0, 2.0 * a + 1.0),
        }
    }
}

/// Checks that every candidate root lies on the side of the imaginary axis
/// predicted for its family. Returns the number of roots checked.
pub fn wynn_root_sides(
    a: f64,
    family: WynnFamily,
    roots: &[Complex64],
) -> Result<usize, HypergeomError> {
    if !(a > -0.5) || !a.is_finite() {
        return Err(HypergeomError::WynnDomain(a));
    }
    let wrong: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|r| match family {
            WynnFamily::Balanced => r.re <= 0.0,
            WynnFamily::Shifted => r.re >= 0.0,
        })
        .collect();
    if wrong.is_empty() {
        Ok(roots.len())
    } else {
        Err(HypergeomError::SideViolation(wrong))
    }
}
