//! Two worked controller designs: delayed-velocity feedback for a damped
//! oscillator and the Mach-number loop of a wind tunnel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quasipoly::RetardedQuasipolynomial;
use crate::synthesis::synthesize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("parameter {name} = {value} is outside its admissible range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("radicand {0} of the frequency formula is not positive")]
    NonPositiveRadicand(f64),
    #[error("consistency check '{check}' failed: {detail}")]
    Inconsistent { check: &'static str, detail: String },
}

fn positive(name: &'static str, value: f64) -> Result<(), DesignError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DesignError::InvalidParameter { name, value })
    }
}

/// Delayed velocity/position feedback for `ÿ + 2ζω ẏ + ω² y = u(t − τ)`
/// placing a quadruple root at `s₀ = −ζω − 2/τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderDesign {
    pub zeta: f64,
    pub omega: f64,
    pub tau: f64,
    pub s0: f64,
    pub a0: f64,
    pub alpha0: f64,
    pub alpha1: f64,
}

impl SecondOrderDesign {
    pub fn closed_loop(&self) -> RetardedQuasipolynomial {
        RetardedQuasipolynomial::new(
            self.tau,
            vec![self.omega * self.omega + self.a0, 2.0 * self.zeta * self.omega],
            vec![self.alpha0, self.alpha1],
        )
        .expect("design coefficients are finite")
    }

    pub fn open_loop(&self) -> RetardedQuasipolynomial {
        RetardedQuasipolynomial::new(
            self.tau,
            vec![self.omega * self.omega, 2.0 * self.zeta * self.omega],
            vec![0.0, 0.0],
        )
        .expect("design coefficients are finite")
    }
}

pub fn design_second_order(zeta: f64, omega: f64, tau: f64) -> Result<SecondOrderDesign, DesignError> {
    positive("zeta", zeta)?;
    positive("omega", omega)?;
    positive("tau", tau)?;
    let s0 = -zeta * omega - 2.0 / tau;
    let e = (s0 * tau).exp();
    let d = SecondOrderDesign {
        zeta,
        omega,
        tau,
        s0,
        a0: 6.0 / (tau * tau) + 4.0 * s0 / tau + s0 * s0 - omega * omega,
        alpha0: 2.0 / tau * e * (s0 - 3.0 / tau),
        alpha1: -2.0 / tau * e,
    };
    matches_synthesis(&d.closed_loop(), 2, s0)?;
    Ok(d)
}

const GATE_TOL: f64 = 1e-10;

/// Compares a hand-assembled closed loop against the general closed-form
/// coefficients for the same root and delay.
fn matches_synthesis(
    qp: &RetardedQuasipolynomial,
    n: usize,
    s0: f64,
) -> Result<(), DesignError> {
    let reference = synthesize(n, qp.tau(), s0)
        .map_err(|e| DesignError::Inconsistent {
            check: "closed-form coefficients",
            detail: e.to_string(),
        })?
        .quasipolynomial();
    let pairs = qp
        .a()
        .iter()
        .zip(reference.a())
        .chain(qp.alpha().iter().zip(reference.alpha()));
    for (k, (x, y)) in pairs.enumerate() {
        if (x - y).abs() > GATE_TOL * x.abs().max(y.abs()).max(1e-300) {
            return Err(DesignError::Inconsistent {
                check: "closed-form coefficients",
                detail: format!("coefficient {k}: design gives {x}, closed form gives {y}"),
            });
        }
    }
    Ok(())
}

/// The real root of `X³ + 9X² + 36X + 60`, approximately `−3.6378`.
pub fn real_root_r0() -> f64 {
    let q = |x: f64| ((x + 9.0) * x + 36.0) * x + 60.0;
    let dq = |x: f64| (3.0 * x + 18.0) * x + 36.0;
    let mut x = -3.0 - 9f64.cbrt() + 3f64.cbrt();
    for _ in 0..4 {
        let step = q(x) / dq(x);
        x -= step;
        if step.abs() < 1e-16 * x.abs() {
            break;
        }
    }
    x
}

/// Mach-number controller.
///
/// The plant is `κ ṁ + m = k ϑ(t − τ₀)` with the guide-vane actuator
/// `ϑ̈ + 2ζω ϑ̇ + ω² ϑ = ω² u(t − τ₁)` and the control law
/// `u = −β₀ m − β₁ ṁ − β₂ m̈`. The actuator parameters `ζ, ω` and gains
/// `β₀, β₁, β₂` are chosen so that the closed loop has a sextuple root at `s₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerDesign {
    pub kappa: f64,
    pub k_gain: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub tau: f64,
    pub s0: f64,
    pub zeta: f64,
    pub omega: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub zeta_in_unit_interval: bool,
}

/// Units of the [`ControllerDesign`] fields, in field order.
pub const CONTROLLER_UNITS: [(&str, &str); 11] = [
    ("kappa", "s"),
    ("k_gain", "1/rad"),
    ("tau0", "s"),
    ("tau1", "s"),
    ("tau", "s"),
    ("s0", "1/s"),
    ("zeta", "1"),
    ("omega", "rad/s"),
    ("beta0", "1"),
    ("beta1", "s"),
    ("beta2", "s^2"),
];

impl ControllerDesign {
    fn values(&self) -> [f64; 11] {
        [
            self.kappa,
            self.k_gain,
            self.tau0,
            self.tau1,
            self.tau,
            self.s0,
            self.zeta,
            self.omega,
            self.beta0,
            self.beta1,
            self.beta2,
        ]
    }

    /// `(name, value, unit)` triples in field order.
    pub fn table(&self) -> Vec<(&'static str, f64, &'static str)> {
        CONTROLLER_UNITS
            .iter()
            .zip(self.values())
            .map(|(&(name, unit), v)| (name, v, unit))
            .collect()
    }

    /// Closed-loop characteristic function of `m`, monic in `s³`.
    pub fn closed_loop(&self) -> RetardedQuasipolynomial {
        let w2 = self.omega * self.omega;
        let g = self.k_gain * w2 / self.kappa;
        RetardedQuasipolynomial::new(
            self.tau,
            self.plant_coefficients(),
            vec![-self.beta0 * g, -self.beta1 * g, -self.beta2 * g],
        )
        .expect("design coefficients are finite")
    }

    /// The same loop with the controller switched off.
    pub fn open_loop(&self) -> RetardedQuasipolynomial {
        RetardedQuasipolynomial::new(self.tau, self.plant_coefficients(), vec![0.0; 3])
            .expect("design coefficients are finite")
    }

    fn plant_coefficients(&self) -> Vec<f64> {
        let (w, z, k) = (self.omega, self.zeta, self.kappa);
        vec![
            w * w / k,
            w * w + 2.0 * w * z / k,
            2.0 * w * z + 1.0 / k,
        ]
    }

    /// Checks that the design data are mutually consistent, in particular
    /// that `s₀` equals `r₀/τ − 1/κ` and that all gains are finite.
    pub fn check_consistency(&self) -> Result<(), DesignError> {
        let expected = real_root_r0() / self.tau - 1.0 / self.kappa;
        if (expected - self.s0).abs() > 1e-12 * (1.0 + expected.abs()) {
            return Err(DesignError::Inconsistent {
                check: "dominant root",
                detail: format!("s0 = {}, expected {expected}", self.s0),
            });
        }
        if (self.tau - self.tau0 - self.tau1).abs() > 1e-15 * self.tau {
            return Err(DesignError::Inconsistent {
                check: "total delay",
                detail: format!("tau = {} but tau0 + tau1 = {}", self.tau, self.tau0 + self.tau1),
            });
        }
        if let Some((name, v, _)) = self.table().into_iter().find(|(_, v, _)| !v.is_finite()) {
            return Err(DesignError::Inconsistent {
                check: "finite values",
                detail: format!("{name} = {v}"),
            });
        }
        Ok(())
    }
}

pub fn design_wind_tunnel(
    kappa: f64,
    k_gain: f64,
    tau0: f64,
    tau1: f64,
) -> Result<ControllerDesign, DesignError> {
    positive("kappa", kappa)?;
    if !(k_gain.is_finite() && k_gain < 0.0) {
        return Err(DesignError::InvalidParameter { name: "k_gain", value: k_gain });
    }
    positive("tau0", tau0)?;
    positive("tau1", tau1)?;
    let tau = tau0 + tau1;
    let s0 = real_root_r0() / tau - 1.0 / kappa;
    let omega2 = -kappa
        * (s0.powi(3) + 9.0 * s0 * s0 / tau + 36.0 * s0 / (tau * tau) + 60.0 / tau.powi(3));
    if !(omega2 > 0.0) {
        return Err(DesignError::NonPositiveRadicand(omega2));
    }
    let omega = omega2.sqrt();
    let zeta = -3.0 * s0 / (2.0 * omega) - 9.0 / (2.0 * omega * tau) - 1.0 / (2.0 * omega * kappa);
    let e = (s0 * tau).exp();
    let denom = k_gain * omega2;
    let st = s0 * tau;
    let d = ControllerDesign {
        kappa,
        k_gain,
        tau0,
        tau1,
        tau,
        s0,
        zeta,
        omega,
        beta0: -3.0 * kappa * (st * st - 8.0 * st + 20.0) * e / (denom * tau.powi(3)),
        beta1: 6.0 * kappa * (st - 4.0) * e / (denom * tau * tau),
        beta2: -3.0 * kappa * e / (denom * tau),
        zeta_in_unit_interval: zeta > 0.0 && zeta < 1.0,
    };
    d.check_consistency()?;
    matches_synthesis(&d.closed_loop(), 3, s0)?;
    Ok(d)
}
