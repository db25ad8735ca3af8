//! Retarded quasipolynomials `Δ(s) = P(s) + e^{−sτ} Q(s)` with monic `P`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dd::{Dd, DdComplex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synthesis::binomial::{binom_f64, falling_f64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasipolyError {
    #[error("delay must be positive and finite, got {0}")]
    NonpositiveDelay(f64),
    #[error("order n must be at least 1")]
    EmptyPolynomial,
    #[error("coefficient lengths disagree: n = {n}, a has {a}, alpha has {alpha}")]
    LengthMismatch { n: usize, a: usize, alpha: usize },
    #[error("coefficient {name}[{index}] is not finite")]
    NonFiniteCoefficient { name: &'static str, index: usize },
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("strip bounds must be finite with alpha <= beta, got [{0}, {1}]")]
    InvalidStrip(f64, f64),
}

/// `Δ(s) = sⁿ + Σ_{k<n} a_k sᵏ + e^{−sτ} Σ_{k<n} α_k sᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuasipolyRepr", into = "QuasipolyRepr")]
pub struct RetardedQuasipolynomial {
    tau: f64,
    a: Vec<f64>,
    alpha: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct QuasipolyRepr {
    n: usize,
    tau: f64,
    a: Vec<f64>,
    alpha: Vec<f64>,
}

impl TryFrom<QuasipolyRepr> for RetardedQuasipolynomial {
    type Error = QuasipolyError;

    fn try_from(r: QuasipolyRepr) -> Result<Self, Self::Error> {
        if r.a.len() != r.n || r.alpha.len() != r.n {
            return Err(QuasipolyError::LengthMismatch {
                n: r.n,
                a: r.a.len(),
                alpha: r.alpha.len(),
            });
        }
        Self::new(r.tau, r.a, r.alpha)
    }
}

impl From<RetardedQuasipolynomial> for QuasipolyRepr {
    fn from(q: RetardedQuasipolynomial) -> Self {
        QuasipolyRepr {
            n: q.n(),
            tau: q.tau,
            a: q.a,
            alpha: q.alpha,
        }
    }
}

/// Interval `[lower, upper]` guaranteed by the Pólya–Szegő estimate to contain
/// the number of roots with `Im s` in a horizontal strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripCountBound {
    pub alpha_im: f64,
    pub beta_im: f64,
    pub lower: f64,
    pub upper: f64,
    pub lambda_delta: f64,
}

impl StripCountBound {
    pub fn contains(&self, count: i64) -> bool {
        (count as f64) >= self.lower && (count as f64) <= self.upper
    }
}

impl RetardedQuasipolynomial {
    /// Builds `Δ` from the non-leading coefficients `a` (`a[k]` multiplies `sᵏ`)
    /// and the delayed coefficients `alpha`.
    pub fn new(tau: f64, a: Vec<f64>, alpha: Vec<f64>) -> Result<Self, QuasipolyError> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(QuasipolyError::NonpositiveDelay(tau));
        }
        if a.is_empty() && alpha.is_empty() {
            return Err(QuasipolyError::EmptyPolynomial);
        }
        if a.len() != alpha.len() {
            return Err(QuasipolyError::LengthMismatch {
                n: a.len(),
                a: a.len(),
                alpha: alpha.len(),
            });
        }
        for (name, v) in [("a", &a), ("alpha", &alpha)] {
            if let Some(index) = v.iter().position(|c| !c.is_finite()) {
                return Err(QuasipolyError::NonFiniteCoefficient { name, index });
            }
        }
        Ok(Self { tau, a, alpha })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn has_delay_term(&self) -> bool {
        self.alpha.iter().any(|&c| c != 0.0)
    }

    /// Pólya–Szegő degree: `n` for a pure polynomial, otherwise
    /// `1 + n + max{k : α_k ≠ 0}`. This is also the maximal multiplicity of any root.
    pub fn degree(&self) -> usize {
        match self.alpha.iter().rposition(|&c| c != 0.0) {
            None => self.n(),
            Some(d) => 1 + self.n() + d,
        }
    }

    /// Largest derivative order accepted by [`eval_derivative`](Self::eval_derivative).
    pub fn max_derivative_order(&self) -> usize {
        4 * self.n()
    }

    /// Coefficients of `P` including the leading one, lowest degree first.
    pub fn p_coefficients(&self) -> Vec<f64> {
        let mut p = self.a.clone();
        p.push(1.0);
        p
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let p = horner_monic(&self.a, s);
        let q = horner(&self.alpha, s);
        p + (-s * self.tau).exp() * q
    }

    /// [`eval`](Self::eval) carried out in double-double arithmetic.
    ///
    /// The coefficients and `s` are taken as exact; the result is accurate to
    /// a few units of `1e-30` times the sum of the moduli of the terms, so it
    /// stays accurate near multiple roots where `eval` loses digits to
    /// cancellation.
    pub fn eval_extended(&self, s: Complex64) -> Complex64 {
        let z = DdComplex::new(s.re, s.im);
        let mut p = DdComplex::new(1.0, 0.0);
        for &c in self.a.iter().rev() {
            p = (p * z).add_real(c);
        }
        let mut q = DdComplex::ZERO;
        for &c in self.alpha.iter().rev() {
            q = (q * z).add_real(c);
        }
        let arg = DdComplex {
            re: -Dd::prod(self.tau, s.re),
            im: -Dd::prod(self.tau, s.im),
        };
        (p + arg.exp() * q).to_c64()
    }

    /// `Δ⁽ᵏ⁾(s) = P⁽ᵏ⁾(s) + e^{−sτ} Σ_j C(k, j) (−τ)^{k−j} Q⁽ʲ⁾(s)`.
    pub fn eval_derivative(&self, s: Complex64, order: usize) -> Result<Complex64, QuasipolyError> {
        self.check_order(order)?;
        let p = self.p_coefficients();
        let pk = derivative_horner(&p, order, s);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=order.min(self.n().saturating_sub(1)) {
            let qj = derivative_horner(&self.alpha, j, s);
            acc += binom_f64(order as u64, j as u64) * (-self.tau).powi((order - j) as i32) * qj;
        }
        Ok(pk + (-s * self.tau).exp() * acc)
    }

    /// The same sum as [`eval_derivative`](Self::eval_derivative) with every term
    /// replaced by its absolute value.
    ///
    /// A computed derivative whose modulus is a small multiple of machine epsilon
    /// times this quantity cannot be distinguished from zero.
    pub fn derivative_magnitude(&self, s: Complex64, order: usize) -> Result<f64, QuasipolyError> {
        self.check_order(order)?;
        let r = s.norm();
        let p: Vec<f64> = self.p_coefficients().iter().map(|c| c.abs()).collect();
        let q: Vec<f64> = self.alpha.iter().map(|c| c.abs()).collect();
        let pk = derivative_horner_real(&p, order, r);
        let mut acc = 0.0;
        for j in 0..=order.min(self.n().saturating_sub(1)) {
            acc += binom_f64(order as u64, j as u64)
                * self.tau.powi((order - j) as i32)
                * derivative_horner_real(&q, j, r);
        }
        Ok(pk + (-s.re * self.tau).exp() * acc)
    }

    /// Taylor coefficients `Δ⁽ᵏ⁾(c) / k!` for `k = 0..count`. Unlike
    /// [`eval_derivative`](Self::eval_derivative) there is no cap on the order.
    pub fn taylor_coefficients(&self, center: Complex64, count: usize) -> Vec<Complex64> {
        let (p_hat, q_hat) = self.shifted_parts(center);
        let e = (-center * self.tau).exp();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let mut c = p_hat.get(k).copied().unwrap_or_default();
            let mut delayed = Complex64::new(0.0, 0.0);
            for (j, qj) in q_hat.iter().enumerate().take(k + 1) {
                delayed += qj * exp_taylor(-self.tau, k - j);
            }
            c += e * delayed;
            out.push(c);
        }
        out
    }

    /// Absolute-value counterpart of [`taylor_coefficients`](Self::taylor_coefficients).
    pub fn taylor_magnitudes(&self, center: Complex64, count: usize) -> Vec<f64> {
        let r = center.norm();
        let p_abs: Vec<f64> = self.p_coefficients().iter().map(|c| c.abs()).collect();
        let q_abs: Vec<f64> = self.alpha.iter().map(|c| c.abs()).collect();
        let p_hat = shift_real(&p_abs, r);
        let q_hat = shift_real(&q_abs, r);
        let e = (-center.re * self.tau).exp();
        (0..count)
            .map(|k| {
                let delayed: f64 = q_hat
                    .iter()
                    .enumerate()
                    .take(k + 1)
                    .map(|(j, q)| q * exp_taylor(self.tau, k - j))
                    .sum();
                p_hat.get(k).copied().unwrap_or(0.0) + e * delayed
            })
            .collect()
    }

    fn shifted_parts(&self, center: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        let p: Vec<Complex64> = self.p_coefficients().iter().map(|&c| c.into()).collect();
        let q: Vec<Complex64> = self.alpha.iter().map(|&c| c.into()).collect();
        (shift_complex(&p, center), shift_complex(&q, center))
    }

    /// Bounds on the number of roots with `alpha ≤ Im s ≤ beta`:
    /// `λ_δ (beta − alpha) / 2π ± D`, where `λ_δ` is `τ` when the delayed part
    /// is present and zero otherwise.
    pub fn polya_szego_bound(&self, alpha: f64, beta: f64) -> Result<StripCountBound, QuasipolyError> {
        if !(alpha <= beta) || !alpha.is_finite() || !beta.is_finite() {
            return Err(QuasipolyError::InvalidStrip(alpha, beta));
        }
        let lambda = if self.has_delay_term() { self.tau } else { 0.0 };
        let d = self.degree() as f64;
        let centre = lambda * (beta - alpha) / (2.0 * PI);
        Ok(StripCountBound {
            alpha_im: alpha,
            beta_im: beta,
            lower: centre - d,
            upper: centre + d,
            lambda_delta: lambda,
        })
    }

    /// JSON object `{"n", "tau", "a", "alpha"}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("quasipolynomial serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn check_order(&self, order: usize) -> Result<(), QuasipolyError> {
        let max = self.max_derivative_order();
        if order > max {
            return Err(QuasipolyError::OrderTooLarge { order, max });
        }
        Ok(())
    }
}

/// A quasipolynomial after the change of variables `λ = τ(s − s₀)`:
/// `Δ̃(λ) = λⁿ + Σ b_k λᵏ + e^{−λ} Σ β_k λᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedQuasipolynomial {
    pub b: Vec<f64>,
    pub beta: Vec<f64>,
}

impl NormalizedQuasipolynomial {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// The same function viewed as a quasipolynomial with unit delay.
    pub fn as_quasipolynomial(&self) -> Result<RetardedQuasipolynomial, QuasipolyError> {
        RetardedQuasipolynomial::new(1.0, self.b.clone(), self.beta.clone())
    }

    /// `P̃⁽ᵏ⁾(0) = k! b_k` for `k < n`.
    pub fn p_derivatives_at_zero(&self) -> Vec<f64> {
        self.b
            .iter()
            .enumerate()
            .map(|(k, b)| falling_f64(k as u64, k as u64) * b)
            .collect()
    }

    /// `Q̃⁽ᵏ⁾(0) = k! β_k` for `k < n`.
    pub fn q_derivatives_at_zero(&self) -> Vec<f64> {
        self.beta
            .iter()
            .enumerate()
            .map(|(k, b)| falling_f64(k as u64, k as u64) * b)
            .collect()
    }
}

/// `∫₀¹ p(t) e^{−z t} dt` for real coefficients `p` (lowest degree first).
///
/// Large `|z|` uses the terminating expansion
/// `Σ_k (p⁽ᵏ⁾(0) − p⁽ᵏ⁾(1) e^{−z}) / z^{k+1}`; otherwise the integral is
/// expanded about `t = 1/2`, where the series has only even moments and no
/// cancellation between the endpoints.
pub fn poly_exp_integral(p: &[f64], z: Complex64) -> Complex64 {
    let Some(deg) = p.iter().rposition(|&c| c != 0.0) else {
        return Complex64::new(0.0, 0.0);
    };
    let p = &p[..=deg];
    if z.norm() >= CLOSED_FORM_RADIUS.max(deg as f64) {
        closed_form_integral(p, z)
    } else {
        centred_series_integral(p, z)
    }
}

const CLOSED_FORM_RADIUS: f64 = 8.0;

fn closed_form_integral(p: &[f64], z: Complex64) -> Complex64 {
    let e = (-z).exp();
    let inv_z = z.inv();
    let mut zpow = inv_z;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..p.len() {
        let at0 = falling_f64(k as u64, k as u64) * p[k];
        let at1 = derivative_horner_real(p, k, 1.0);
        acc += (at0 - at1 * e) * zpow;
        zpow *= inv_z;
    }
    acc
}

fn centred_series_integral(p: &[f64], z: Complex64) -> Complex64 {
    let q = shift_real(p, 0.5);
    let mut moments = Vec::with_capacity(q.len());
    for j in 0..q.len() {
        moments.push(centred_moment(j, z));
    }
    let sum: Complex64 = q.iter().zip(&moments).map(|(c, m)| c * m).sum();
    (-z * 0.5).exp() * sum
}

/// `∫_{−1/2}^{1/2} u^j e^{−z u} du` by its power series in `z`.
fn centred_moment(j: usize, z: Complex64) -> Complex64 {
    let mz = -z;
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut small = 0;
    for m in 0..400usize {
        if m > 0 {
            coeff *= mz / m as f64;
        }
        let r = j + m;
        if r % 2 == 1 {
            continue;
        }
        let term = coeff * 0.5f64.powi(r as i32) / (r + 1) as f64;
        acc += term;
        if (m as f64) > z.norm() && term.norm() <= f64::EPSILON * 1e-2 * acc.norm() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    acc
}

fn horner(c: &[f64], s: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &x| acc * s + x)
}

fn horner_monic(c: &[f64], s: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(1.0, 0.0), |acc, &x| acc * s + x)
}

/// `k`-th derivative of `Σ c_j s^j` at `s`.
fn derivative_horner(c: &[f64], k: usize, s: Complex64) -> Complex64 {
    if k >= c.len() {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in (k..c.len()).rev() {
        acc = acc * s + c[j] * falling_f64(j as u64, k as u64);
    }
    acc
}

fn derivative_horner_real(c: &[f64], k: usize, s: f64) -> f64 {
    if k >= c.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    for j in (k..c.len()).rev() {
        acc = acc * s + c[j] * falling_f64(j as u64, k as u64);
    }
    acc
}

/// Coefficients of `p(x + c)` in powers of `x`.
fn shift_complex(p: &[Complex64], c: Complex64) -> Vec<Complex64> {
    let mut out = p.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = out[j + 1];
            out[j] += c * next;
        }
    }
    out
}

fn shift_real(p: &[f64], c: f64) -> Vec<f64> {
    let mut out = p.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = out[j + 1];
            out[j] += c * next;
        }
    }
    out
}

/// `x^m / m!`.
fn exp_taylor(x: f64, m: usize) -> f64 {
    let mut v = 1.0;
    for i in 1..=m {
        v *= x / i as f64;
    }
    v
}
