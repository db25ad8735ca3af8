//! Request types and the computations behind both the subcommands and the
//! HTTP endpoints.

use std::f64::consts::PI;

use middom::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_TOL: f64 = 1e-8;

fn default_tol() -> f64 {
    DEFAULT_TOL
}

pub fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        Err(CliError::validation(format!("--tol must lie in (0, 1e-3], got {tol}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SynthesizeRequest {
    pub n: usize,
    pub tau: f64,
    pub s0: f64,
}

pub fn synthesize_op(req: &SynthesizeRequest) -> Result<SynthesisResult, CliError> {
    Ok(synthesize(req.n, req.tau, req.s0)?)
}

#[derive(Debug, Clone, Deserialize)]
pub struct RootsRequest {
    pub qp: RetardedQuasipolynomial,
    pub rect: Rectangle,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

pub fn roots_op(req: &RootsRequest) -> Result<SpectrumReport, CliError> {
    check_tol(req.tol)?;
    req.rect.validate()?;
    Ok(find_roots(&req.qp, &req.rect, req.tol)?)
}

#[derive(Debug, Clone, Deserialize)]
pub struct SecondOrderRequest {
    pub zeta: f64,
    pub omega: f64,
    pub tau: f64,
}

pub fn second_order_op(req: &SecondOrderRequest) -> Result<SecondOrderDesign, CliError> {
    Ok(design_second_order(req.zeta, req.omega, req.tau)?)
}

#[derive(Debug, Clone, Deserialize)]
pub struct WindTunnelRequest {
    pub kappa: f64,
    pub k_gain: f64,
    pub tau0: f64,
    pub tau1: f64,
}

pub fn wind_tunnel_op(req: &WindTunnelRequest) -> Result<ControllerDesign, CliError> {
    Ok(design_wind_tunnel(req.kappa, req.k_gain, req.tau0, req.tau1)?)
}

/// Either a named scenario, a full simulation spec, or a bare
/// quasipolynomial (simulated from the history `y ≡ 1`).
#[derive(Debug, Clone, Default, Deserialize)]
pub struct SimulateRequest {
    pub scenario: Option<String>,
    pub spec: Option<SimulationSpec>,
    pub qp: Option<RetardedQuasipolynomial>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub fit: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SimulateResponse {
    Scenario {
        scenario: String,
        s0: f64,
        open_loop: SimulationTrace,
        closed_loop: SimulationTrace,
    },
    Single(SimulationTrace),
}

const DEFAULT_T_END: f64 = 10.0;

fn run_and_fit(spec: &SimulationSpec, fit: Option<[f64; 2]>) -> Result<SimulationTrace, CliError> {
    let mut trace = simulate(spec)?;
    let (t0, t1) = match fit {
        Some([t0, t1]) => (t0, t1),
        None => trace.default_window(),
    };
    trace.fitted_rate = match fit_decay_rate(&trace, t0, t1) {
        Ok(rate) => Some(rate),
        Err(e) if fit.is_some() => return Err(e.into()),
        Err(_) => None,
    };
    Ok(trace)
}

pub fn simulate_op(req: &SimulateRequest) -> Result<SimulateResponse, CliError> {
    let given = [req.scenario.is_some(), req.spec.is_some(), req.qp.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::validation(
            "exactly one of scenario, spec or qp must be given",
        ));
    }
    if let Some(name) = &req.scenario {
        let scenario: Scenario = name.parse()?;
        let (t_end, dt) = scenario.default_horizon();
        let pair = build_scenario(scenario, req.t_end.unwrap_or(t_end), req.dt.unwrap_or(dt))?;
        return Ok(SimulateResponse::Scenario {
            scenario: scenario.name().to_string(),
            s0: pair.s0,
            open_loop: run_and_fit(&pair.open_loop, req.fit)?,
            closed_loop: run_and_fit(&pair.closed_loop, req.fit)?,
        });
    }
    let spec = match (&req.spec, &req.qp) {
        (Some(spec), _) if req.t_end.is_none() && req.dt.is_none() => spec.clone(),
        (Some(spec), _) => SimulationSpec::with_output_step(
            spec.qp.clone(),
            spec.initial.clone(),
            req.t_end.unwrap_or(spec.t_end),
            req.dt.unwrap_or(spec.dt),
        ),
        (None, Some(qp)) => {
            let mut y0 = vec![0.0; qp.n()];
            y0[0] = 1.0;
            SimulationSpec::with_output_step(
                qp.clone(),
                History::Constant(y0),
                req.t_end.unwrap_or(DEFAULT_T_END),
                req.dt.unwrap_or(qp.tau() / 20.0),
            )
        }
        (None, None) => unreachable!("checked above"),
    };
    Ok(SimulateResponse::Single(run_and_fit(&spec, req.fit)?))
}

/// A synthesized system given by its order, delay and root.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct MidCase {
    pub n: usize,
    pub tau: f64,
    pub s0: f64,
}

fn random_cases(seed: u64, draws: usize, max_n: usize) -> Vec<MidCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| MidCase {
            n: rng.random_range(1..=max_n),
            tau: rng.random_range(0.2..3.0),
            s0: rng.random_range(-5.0..5.0),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityCheck {
    pub n: usize,
    pub tau: f64,
    pub s0: f64,
    pub expected: usize,
    pub multiplicity: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceCheck {
    pub n: usize,
    pub tau: f64,
    #[serde(flatten)]
    pub report: DominanceReport,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationCheck {
    pub n: usize,
    pub grid: usize,
    pub max_relative_residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub max_index: usize,
    pub cases_checked: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "what", rename_all = "snake_case")]
pub enum VerifyReport {
    Multiplicity { ok: bool, checks: Vec<MultiplicityCheck> },
    Dominance { ok: bool, checks: Vec<DominanceCheck> },
    Factorization { ok: bool, checks: Vec<FactorizationCheck> },
    Identities { ok: bool, checks: Vec<IdentityCheck> },
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        match self {
            VerifyReport::Multiplicity { ok, .. }
            | VerifyReport::Dominance { ok, .. }
            | VerifyReport::Factorization { ok, .. }
            | VerifyReport::Identities { ok, .. } => *ok,
        }
    }
}

pub const FACTORIZATION_TOL: f64 = 1e-8;

/// Options shared by the `verify` checks. When `case` is `None` a seeded
/// random suite of `draws` systems is checked instead.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub case: Option<MidCase>,
    pub tol: f64,
    pub seed: u64,
    pub draws: usize,
    pub half_height: Option<f64>,
    pub max_index: usize,
}

pub fn verify_multiplicity(opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    check_tol(opts.tol)?;
    let cases = opts.case.map_or_else(|| random_cases(opts.seed, opts.draws, 6), |c| vec![c]);
    let mut checks = Vec::with_capacity(cases.len());
    for c in cases {
        let q = synthesize(c.n, c.tau, c.s0)?.quasipolynomial();
        let m = certify_multiplicity(&q, c.s0, opts.tol)?;
        checks.push(MultiplicityCheck {
            n: c.n,
            tau: c.tau,
            s0: c.s0,
            expected: 2 * c.n,
            multiplicity: m,
            ok: m == 2 * c.n,
        });
    }
    Ok(VerifyReport::Multiplicity {
        ok: checks.iter().all(|c| c.ok),
        checks,
    })
}

pub fn verify_dominance_op(opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let cases = opts.case.map_or_else(|| random_cases(opts.seed, opts.draws, 4), |c| vec![c]);
    let mut checks = Vec::with_capacity(cases.len());
    for c in cases {
        let q = synthesize(c.n, c.tau, c.s0)?.quasipolynomial();
        let h = opts.half_height.unwrap_or(40.0 * PI / c.tau);
        let report = verify_dominance(&q, c.s0, h)?;
        checks.push(DominanceCheck {
            n: c.n,
            tau: c.tau,
            ok: report.dominant && report.multiplicity == 2 * c.n,
            report,
        });
    }
    Ok(VerifyReport::Dominance {
        ok: checks.iter().all(|c| c.ok),
        checks,
    })
}

/// Compares `Δ̃` with its hypergeometric factorization on a `grid × grid`
/// lattice of `[−20, 20]²`.
pub fn verify_factorization(orders: &[usize], grid: usize) -> Result<VerifyReport, CliError> {
    if grid < 2 {
        return Err(CliError::validation("grid must have at least 2 points per side"));
    }
    let mut checks = Vec::with_capacity(orders.len());
    for &n in orders {
        let (b, beta) = normalized_coefficients(n)?;
        let q = RetardedQuasipolynomial::new(1.0, b, beta)?;
        let mut worst = 0.0f64;
        let step = 40.0 / (grid - 1) as f64;
        for i in 0..grid {
            for j in 0..grid {
                let z = Complex64::new(-20.0 + step * i as f64, -20.0 + step * j as f64);
                let direct = q.eval_extended(z);
                let factored = factored_delta(n, z)?;
                if direct != factored {
                    worst = worst.max((direct - factored).norm() / direct.norm());
                }
            }
        }
        checks.push(FactorizationCheck {
            n,
            grid,
            max_relative_residual: worst,
            ok: worst <= FACTORIZATION_TOL,
        });
    }
    Ok(VerifyReport::Factorization {
        ok: checks.iter().all(|c| c.ok),
        checks,
    })
}

pub fn verify_identities(max_index: usize) -> Result<VerifyReport, CliError> {
    let report = binomial_suite(max_index)?;
    Ok(VerifyReport::Identities {
        ok: true,
        checks: vec![IdentityCheck {
            max_index: report.max_index,
            cases_checked: report.cases_checked,
            ok: true,
        }],
    })
}
