//! Closed-form MID coefficients and the maps to and from normalized form.

pub mod binomial;
pub mod oracle;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use binomial::{binomial_suite, IdentityReport};
pub use oracle::{oracle_normalized_coefficients, LinearSystemOracle};

use crate::quasipoly::{NormalizedQuasipolynomial, QuasipolyError, RetardedQuasipolynomial};
use binomial::{binom_f64, falling_f64};

/// Largest order accepted by [`synthesize`].
pub const MAX_ORDER: usize = 85;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("order n must be at least 1")]
    ZeroOrder,
    #[error("order n = {n} exceeds the supported maximum {max}")]
    OrderTooLarge { n: usize, max: usize },
    #[error("delay must be positive and finite, got {0}")]
    NonpositiveDelay(f64),
    #[error("root location must be finite, got {0}")]
    NonFiniteRoot(f64),
    #[error("relative tolerance must lie in (0, 1e-3], got {0}")]
    InvalidTolerance(f64),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("identity suite index {max_index} exceeds the limit {limit}")]
    IndexTooLarge { max_index: usize, limit: usize },
    #[error("{identity} identity fails at {indices}")]
    IdentityViolation { identity: &'static str, indices: String },
    #[error(transparent)]
    Quasipoly(#[from] QuasipolyError),
}

/// Coefficients placing a real root `s₀` of multiplicity `2n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub n: usize,
    pub tau: f64,
    pub a: Vec<f64>,
    pub alpha: Vec<f64>,
    pub s0: f64,
    pub b: Vec<f64>,
    pub beta: Vec<f64>,
    pub stable: bool,
}

impl SynthesisResult {
    pub fn quasipolynomial(&self) -> RetardedQuasipolynomial {
        RetardedQuasipolynomial::new(self.tau, self.a.clone(), self.alpha.clone())
            .expect("synthesized coefficients are always finite")
    }

    pub fn normalized(&self) -> NormalizedQuasipolynomial {
        NormalizedQuasipolynomial {
            b: self.b.clone(),
            beta: self.beta.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("synthesis result serialization cannot fail")
    }
}

fn check_order(n: usize) -> Result<(), SynthesisError> {
    match n {
        0 => Err(SynthesisError::ZeroOrder),
        n if n > MAX_ORDER => Err(SynthesisError::OrderTooLarge { n, max: MAX_ORDER }),
        _ => Ok(()),
    }
}

fn check_tau(tau: f64) -> Result<(), SynthesisError> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(SynthesisError::NonpositiveDelay(tau))
    }
}

fn neg_one_pow(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized coefficients
/// `b_k = (−1)^{n−k} (n!/k!) C(2n−k−1, n−1)` and
/// `β_k = (−1)^{n−1} (2n−k−1)! / (k! (n−k−1)!)`.
pub fn normalized_coefficients(n: usize) -> Result<(Vec<f64>, Vec<f64>), SynthesisError> {
    check_order(n)?;
    let nu = n as u64;
    let b = (0..nu)
        .map(|k| {
            neg_one_pow((nu - k) as usize)
                * falling_f64(nu, nu - k)
                * binom_f64(2 * nu - k - 1, nu - 1)
        })
        .collect();
    let beta = (0..nu)
        .map(|k| {
            neg_one_pow(n - 1) * binom_f64(2 * nu - k - 1, nu) * falling_f64(nu, nu - k)
        })
        .collect();
    Ok((b, beta))
}

/// Coefficients `(a, α)` for which `s₀` is a root of multiplicity `2n` of
/// the quasipolynomial with delay `τ`.
pub fn synthesize(n: usize, tau: f64, s0: f64) -> Result<SynthesisResult, SynthesisError> {
    check_order(n)?;
    check_tau(tau)?;
    if !s0.is_finite() {
        return Err(SynthesisError::NonFiniteRoot(s0));
    }
    let nu = n as u64;
    let inv_tau: Vec<f64> = (0..=n).map(|i| tau.powi(-(i as i32))).collect();
    let growth = (s0 * tau).exp();

    let mut a = vec![0.0; n];
    let mut alpha = vec![0.0; n];
    for k in 0..n {
        let ku = k as u64;
        let mut sum_a = 0.0;
        let mut sum_alpha = 0.0;
        let mut pow = 1.0;
        for j in k..n {
            let ju = j as u64;
            let ratio = falling_f64(nu, nu - ju);
            let cjk = binom_f64(ju, ku);
            sum_a += ratio * cjk * binom_f64(2 * nu - ju - 1, nu - 1) * pow * inv_tau[n - j];
            sum_alpha += neg_one_pow(j - k)
                * ratio
                * cjk
                * binom_f64(2 * nu - ju - 1, nu)
                * pow
                * inv_tau[n - j];
            pow *= s0;
        }
        a[k] = binom_f64(nu, ku) * (-s0).powi((n - k) as i32) + neg_one_pow(n - k) * sum_a;
        alpha[k] = neg_one_pow(n - 1) * growth * sum_alpha;
    }

    let (b, beta) = normalized_coefficients(n)?;
    Ok(SynthesisResult {
        n,
        tau,
        a,
        alpha,
        s0,
        b,
        beta,
        stable: s0 < 0.0,
    })
}

/// The dominant root `s₀ = −a_{n−1}/n − n/τ` determined by the leading
/// non-delayed coefficient.
pub fn dominant_root_from_coeff(n: usize, tau: f64, a_top: f64) -> f64 {
    -a_top / n as f64 - n as f64 / tau
}

/// Maps `Δ` to `Δ̃(λ) = τⁿ Δ(s₀ + λ/τ)`:
/// `b_k = C(n,k) τ^{n−k} s₀^{n−k} + τ^{n−k} Σ_j C(j,k) s₀^{j−k} a_j` and
/// `β_k = τ^{n−k} e^{−s₀τ} Σ_j C(j,k) s₀^{j−k} α_j`.
pub fn normalize(qp: &RetardedQuasipolynomial, s0: f64) -> NormalizedQuasipolynomial {
    let n = qp.n();
    let tau = qp.tau();
    let decay = (-s0 * tau).exp();
    let mut b = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for k in 0..n {
        let scale = tau.powi((n - k) as i32);
        let mut sa = 0.0;
        let mut sb = 0.0;
        let mut pow = 1.0;
        for j in k..n {
            let cjk = binom_f64(j as u64, k as u64);
            sa += cjk * pow * qp.a()[j];
            sb += cjk * pow * qp.alpha()[j];
            pow *= s0;
        }
        b[k] = binom_f64(n as u64, k as u64) * scale * s0.powi((n - k) as i32) + scale * sa;
        beta[k] = scale * decay * sb;
    }
    NormalizedQuasipolynomial { b, beta }
}

/// Inverse of [`normalize`]:
/// `a_k = C(n,k)(−s₀)^{n−k} + Σ_j (−1)^{j−k} C(j,k) s₀^{j−k} τ^{j−n} b_j` and
/// `α_k = e^{s₀τ} Σ_j (−1)^{j−k} C(j,k) s₀^{j−k} τ^{j−n} β_j`.
pub fn denormalize(
    nq: &NormalizedQuasipolynomial,
    tau: f64,
    s0: f64,
) -> Result<RetardedQuasipolynomial, SynthesisError> {
    check_tau(tau)?;
    let n = nq.n();
    if nq.beta.len() != n {
        return Err(QuasipolyError::LengthMismatch {
            n,
            a: n,
            alpha: nq.beta.len(),
        }
        .into());
    }
    let growth = (s0 * tau).exp();
    let mut a = vec![0.0; n];
    let mut alpha = vec![0.0; n];
    for k in 0..n {
        let mut sa = 0.0;
        let mut sb = 0.0;
        let mut pow = 1.0;
        for j in k..n {
            let w = neg_one_pow(j - k)
                * binom_f64(j as u64, k as u64)
                * pow
                * tau.powi(j as i32 - n as i32);
            sa += w * nq.b[j];
            sb += w * nq.beta[j];
            pow *= s0;
        }
        a[k] = binom_f64(n as u64, k as u64) * (-s0).powi((n - k) as i32) + sa;
        alpha[k] = growth * sb;
    }
    Ok(RetardedQuasipolynomial::new(tau, a, alpha)?)
}

/// Number of consecutive derivatives `Δ⁽ᵏ⁾(s₀)` that vanish to relative
/// tolerance `rel_tol`, capped at the degree of `Δ`.
///
/// Each derivative is compared against the sum of absolute values of the terms
/// it is computed from, so the test is insensitive to the overall scale of the
/// coefficients and to cancellation inside the evaluation.
pub fn certify_multiplicity(
    qp: &RetardedQuasipolynomial,
    s0: f64,
    rel_tol: f64,
) -> Result<usize, SynthesisError> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(SynthesisError::InvalidTolerance(rel_tol));
    }
    let s = Complex64::new(s0, 0.0);
    let cap = qp.degree();
    for k in 0..cap {
        let d = qp.eval_derivative(s, k)?.norm();
        let scale = qp.derivative_magnitude(s, k)?;
        if !(d <= rel_tol * scale) {
            return Ok(k);
        }
    }
    Ok(cap)
}
