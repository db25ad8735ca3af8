//! Method-of-steps simulation of the delay-differential equation whose
//! characteristic function is a [`RetardedQuasipolynomial`], and decay-rate
//! estimation from the simulated response.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::{design_second_order, design_wind_tunnel, DesignError};
use crate::quasipoly::RetardedQuasipolynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("integration step must divide the delay into at least {min} equal parts (tau = {tau}, rk_dt = {rk_dt})")]
    StepNotDividingDelay { tau: f64, rk_dt: f64, min: usize },
    #[error("output step {dt} must be positive and not smaller than the integration step {rk_dt}")]
    InvalidOutputStep { dt: f64, rk_dt: f64 },
    #[error("final time must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("history has {got} components, expected {expected}")]
    HistoryDimension { expected: usize, got: usize },
    #[error("fit window [{t0}, {t1}] is empty or outside the trace")]
    InvalidWindow { t0: f64, t1: f64 },
    #[error("fit window contains {got} samples, at least {min} are required")]
    InsufficientData { got: usize, min: usize },
    #[error("response vanishes in the fit window")]
    ZeroResponse,
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// Minimum number of integration steps per delay interval.
pub const MIN_STEPS_PER_DELAY: usize = 20;
/// Magnitude at which a trajectory is declared to have blown up.
pub const BLOW_UP: f64 = 1e12;
const MIN_FIT_SAMPLES: usize = 50;

/// Initial function on `[−τ, 0]` for the state `(y, y′, …, y⁽ⁿ⁻¹⁾)`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum History {
    /// Each state component is held at the given value.
    Constant(Vec<f64>),
    /// `y(t) = Σ c_k t^k`; the remaining components are its derivatives.
    Polynomial(Vec<f64>),
    /// Arbitrary state history.
    #[serde(skip)]
    Function(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            History::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            History::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl PartialEq for History {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (History::Constant(a), History::Constant(b)) => a == b,
            (History::Polynomial(a), History::Polynomial(b)) => a == b,
            (History::Function(a), History::Function(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl History {
    pub fn state(&self, t: f64, n: usize) -> Vec<f64> {
        match self {
            History::Constant(v) => v.clone(),
            History::Polynomial(c) => {
                let mut coeffs = c.clone();
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(coeffs.iter().rev().fold(0.0, |acc, x| acc * t + x));
                    coeffs = coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, x)| k as f64 * x)
                        .collect();
                }
                out
            }
            History::Function(f) => f(t),
        }
    }

    pub fn label(&self) -> String {
        match self {
            History::Constant(v) => format!("constant {v:?}"),
            History::Polynomial(c) => format!("polynomial {c:?}"),
            History::Function(_) => "function".to_string(),
        }
    }
}

/// Everything needed to reproduce a simulation run.
///
/// `rk_dt` is the Runge–Kutta step and must equal `τ/m` for an integer
/// `m ≥ 20`; `dt` is the spacing of the reported samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub qp: RetardedQuasipolynomial,
    pub initial: History,
    pub t_end: f64,
    pub dt: f64,
    pub rk_dt: f64,
}

impl SimulationSpec {
    /// A spec whose integration step is the largest `τ/m` not exceeding `dt`.
    pub fn with_output_step(
        qp: RetardedQuasipolynomial,
        initial: History,
        t_end: f64,
        dt: f64,
    ) -> Self {
        let tau = qp.tau();
        let m = ((tau / dt) - 1e-9).ceil().max(MIN_STEPS_PER_DELAY as f64);
        Self {
            rk_dt: tau / m,
            qp,
            initial,
            t_end,
            dt,
        }
    }

    fn steps_per_delay(&self) -> Result<usize, SimError> {
        let tau = self.qp.tau();
        let err = SimError::StepNotDividingDelay {
            tau,
            rk_dt: self.rk_dt,
            min: MIN_STEPS_PER_DELAY,
        };
        if !(self.rk_dt > 0.0 && self.rk_dt.is_finite()) {
            return Err(err);
        }
        let m = (tau / self.rk_dt).round();
        if m < MIN_STEPS_PER_DELAY as f64 || (m * self.rk_dt - tau).abs() > 1e-9 * tau {
            return Err(err);
        }
        Ok(m as usize)
    }

    pub fn validate(&self) -> Result<usize, SimError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SimError::InvalidHorizon(self.t_end));
        }
        let m = self.steps_per_delay()?;
        if !(self.dt.is_finite() && self.dt >= self.rk_dt * (1.0 - 1e-9)) {
            return Err(SimError::InvalidOutputStep {
                dt: self.dt,
                rk_dt: self.rk_dt,
            });
        }
        let n = self.qp.n();
        let h0 = self.initial.state(0.0, n).len();
        if h0 != n {
            return Err(SimError::HistoryDimension { expected: n, got: h0 });
        }
        Ok(m)
    }
}

/// Sampled response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    /// `y_full[c][i]` is the `c`-th derivative of `y` at `times[i]`.
    pub y_full: Vec<Vec<f64>>,
    pub rk_dt: f64,
    pub dt: f64,
    pub history: String,
    pub blew_up: bool,
    pub fitted_rate: Option<f64>,
}

impl SimulationTrace {
    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// State `(y, y′, …)` at sample `i`.
    pub fn state(&self, i: usize) -> Vec<f64> {
        self.y_full.iter().map(|c| c[i]).collect()
    }

    /// Default fit window `[0.2·t_end, 0.8·t_end]`.
    pub fn default_window(&self) -> (f64, f64) {
        let t = self.last_time();
        (0.2 * t, 0.8 * t)
    }
}

struct System {
    n: usize,
    a: Vec<f64>,
    alpha: Vec<f64>,
}

impl System {
    /// `x′ = A x + B x(t − τ)` in companion form.
    fn rhs(&self, x: &[f64], xd: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n - 1 {
            out[i] = x[i + 1];
        }
        let mut top = 0.0;
        for k in 0..n {
            top -= self.a[k] * x[k] + self.alpha[k] * xd[k];
        }
        out[n - 1] = top;
    }
}

fn hermite(x0: &[f64], f0: &[f64], x1: &[f64], f1: &[f64], h: f64, theta: f64) -> Vec<f64> {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    (0..x0.len())
        .map(|i| h00 * x0[i] + h * h10 * f0[i] + h01 * x1[i] + h * h11 * f1[i])
        .collect()
}

/// Integrates the DDE with classical RK4 on the grid `t_i = i·rk_dt`.
///
/// Delayed states inside the integration range are obtained by cubic Hermite
/// interpolation of the stored grid values and slopes; before `t = 0` the
/// history is evaluated exactly. Reported samples are interpolated the same
/// way. If any component exceeds `1e12` the trace is truncated there and
/// flagged.
pub fn simulate(spec: &SimulationSpec) -> Result<SimulationTrace, SimError> {
    let m = spec.validate()?;
    let n = spec.qp.n();
    let h = spec.rk_dt;
    let sys = System {
        n,
        a: spec.qp.a().to_vec(),
        alpha: spec.qp.alpha().to_vec(),
    };
    let steps = (spec.t_end / h - 1e-9).ceil() as usize;
    let hist = |t: f64| spec.initial.state(t, n);

    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut fs: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let grid_delayed = |i: usize, xs: &[Vec<f64>]| -> Vec<f64> {
        if i >= m {
            xs[i - m].clone()
        } else {
            hist(i as f64 * h - spec.qp.tau())
        }
    };

    xs.push(hist(0.0));
    let mut f0 = vec![0.0; n];
    sys.rhs(&xs[0], &grid_delayed(0, &xs), &mut f0);
    fs.push(f0);

    let mut blew_up = false;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for i in 0..steps {
        let (d0, dmid, d1) = if i + 1 <= m {
            let t = i as f64 * h - spec.qp.tau();
            (hist(t), hist(t + 0.5 * h), hist(t + h))
        } else {
            let j = i - m;
            let mid = hermite(&xs[j], &fs[j], &xs[j + 1], &fs[j + 1], h, 0.5);
            (xs[j].clone(), mid, xs[j + 1].clone())
        };
        let x = &xs[i];
        sys.rhs(x, &d0, &mut k1);
        for c in 0..n {
            tmp[c] = x[c] + 0.5 * h * k1[c];
        }
        sys.rhs(&tmp, &dmid, &mut k2);
        for c in 0..n {
            tmp[c] = x[c] + 0.5 * h * k2[c];
        }
        sys.rhs(&tmp, &dmid, &mut k3);
        for c in 0..n {
            tmp[c] = x[c] + h * k3[c];
        }
        sys.rhs(&tmp, &d1, &mut k4);
        let next: Vec<f64> = (0..n)
            .map(|c| x[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]))
            .collect();
        let mut fnext = vec![0.0; n];
        sys.rhs(&next, &grid_delayed(i + 1, &xs), &mut fnext);
        let bad = next.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP);
        xs.push(next);
        fs.push(fnext);
        if bad {
            blew_up = true;
            break;
        }
    }

    let t_last = ((xs.len() - 1) as f64 * h).min(spec.t_end);
    let samples = (t_last / spec.dt + 1e-9).floor() as usize;
    let mut times = Vec::with_capacity(samples + 1);
    let mut states = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let t = k as f64 * spec.dt;
        let pos = t / h;
        let j = (pos.floor() as usize).min(xs.len().saturating_sub(2));
        let theta = pos - j as f64;
        let state = if xs.len() == 1 {
            xs[0].clone()
        } else if theta.abs() < 1e-12 {
            xs[j].clone()
        } else if (theta - 1.0).abs() < 1e-12 {
            xs[j + 1].clone()
        } else {
            hermite(&xs[j], &fs[j], &xs[j + 1], &fs[j + 1], h, theta)
        };
        times.push(t);
        states.push(state);
    }

    let y_full: Vec<Vec<f64>> = (0..n)
        .map(|c| states.iter().map(|x: &Vec<f64>| x[c]).collect())
        .collect();
    Ok(SimulationTrace {
        times,
        y: y_full[0].clone(),
        y_full,
        rk_dt: h,
        dt: spec.dt,
        history: spec.initial.label(),
        blew_up,
        fitted_rate: None,
    })
}

/// Least-squares slope of `log |y|` over the local maxima of `|y|` in
/// `[t0, t1]`, an estimate of the spectral abscissa.
///
/// With fewer than four peaks in the window the slope is fitted to all
/// nonzero samples instead.
pub fn fit_decay_rate(trace: &SimulationTrace, t0: f64, t1: f64) -> Result<f64, SimError> {
    if !(t0 < t1) || t0 < 0.0 || t1 > trace.last_time() + 1e-9 {
        return Err(SimError::InvalidWindow { t0, t1 });
    }
    let y = &trace.y;
    let idx: Vec<usize> = (0..trace.times.len())
        .filter(|&i| trace.times[i] >= t0 - 1e-12 && trace.times[i] <= t1 + 1e-12)
        .collect();
    if idx.len() < MIN_FIT_SAMPLES {
        return Err(SimError::InsufficientData {
            got: idx.len(),
            min: MIN_FIT_SAMPLES,
        });
    }
    let peaks: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| {
            i > 0
                && i + 1 < y.len()
                && y[i].abs() > y[i - 1].abs()
                && y[i].abs() >= y[i + 1].abs()
                && y[i].abs() > 1e-300
        })
        .collect();
    let chosen: Vec<usize> = if peaks.len() >= 4 {
        peaks
    } else {
        idx.into_iter().filter(|&i| y[i].abs() > 1e-300).collect()
    };
    if chosen.len() < 2 {
        return Err(SimError::ZeroResponse);
    }
    let pts: Vec<(f64, f64)> = chosen
        .iter()
        .map(|&i| (trace.times[i], y[i].abs().ln()))
        .collect();
    Ok(least_squares_slope(&pts))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Window `[L, 2L]` in which the envelope `t^{2n−1} e^{s₀t}` of a `2n`-fold
/// root has a logarithmic slope within 2.5% of `s₀`.
pub fn asymptotic_window(n: usize, s0: f64) -> (f64, f64) {
    let l = (2 * n - 1) as f64 * std::f64::consts::LN_2 / (0.025 * s0.abs());
    (l, 2.0 * l)
}

/// Built-in simulation setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Delayed-velocity control of `ÿ + 2ζω ẏ + ω² y` with `ζ = 0.2`,
    /// `ω = 6`, `τ = 0.5`.
    SecondOrderVelocityDelay,
    /// Wind-tunnel Mach-number loop with `κ = 1.964`, `k = −0.67036`,
    /// `τ₀ = 0.33`, `τ₁ = 0.33`.
    WindTunnelRow1,
    /// Wind-tunnel Mach-number loop with `κ = 1.964`, `k = −0.67036`,
    /// `τ₀ = 0.33`, `τ₁ = 0.70`.
    WindTunnelRow2,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::SecondOrderVelocityDelay,
        Scenario::WindTunnelRow1,
        Scenario::WindTunnelRow2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SecondOrderVelocityDelay => "second_order_velocity_delay",
            Scenario::WindTunnelRow1 => "wind_tunnel_row1",
            Scenario::WindTunnelRow2 => "wind_tunnel_row2",
        }
    }

    /// Horizon and output step used when none are given.
    pub fn default_horizon(self) -> (f64, f64) {
        match self {
            Scenario::SecondOrderVelocityDelay => (3.0, 0.002),
            Scenario::WindTunnelRow1 | Scenario::WindTunnelRow2 => (5.0, 0.001),
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = SimError;

    fn from_str(name: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| SimError::UnknownScenario(name.to_string()))
    }
}

/// Open-loop and closed-loop simulation setups for a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPair {
    pub open_loop: SimulationSpec,
    pub closed_loop: SimulationSpec,
    /// Designed dominant root of the closed loop.
    pub s0: f64,
}

/// Builds the open- and closed-loop runs for `scenario` with the given
/// horizon and output step.
///
/// The wind-tunnel runs integrate the scalar third-order equation for the
/// Mach-number deviation `m` with history `m ≡ −0.1`, `m′ = m″ = 0`.
pub fn build_scenario(scenario: Scenario, t_end: f64, dt: f64) -> Result<ScenarioPair, SimError> {
    let (open, closed, s0, initial) = match scenario {
        Scenario::SecondOrderVelocityDelay => {
            let d = design_second_order(0.2, 6.0, 0.5)?;
            (
                d.open_loop(),
                d.closed_loop(),
                d.s0,
                History::Constant(vec![1.0, 0.0]),
            )
        }
        Scenario::WindTunnelRow1 | Scenario::WindTunnelRow2 => {
            let tau1 = if scenario == Scenario::WindTunnelRow1 { 0.33 } else { 0.70 };
            let d = design_wind_tunnel(1.964, -0.67036, 0.33, tau1)?;
            (
                d.open_loop(),
                d.closed_loop(),
                d.s0,
                History::Constant(vec![-0.1, 0.0, 0.0]),
            )
        }
    };
    Ok(ScenarioPair {
        open_loop: SimulationSpec::with_output_step(open, initial.clone(), t_end, dt),
        closed_loop: SimulationSpec::with_output_step(closed, initial, t_end, dt),
        s0,
    })
}
