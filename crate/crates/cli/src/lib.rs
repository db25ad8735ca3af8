//! `middom` command line: synthesis, verification, root finding,
//! simulation and controller design, plus the HTTP service behind the UI.

pub mod error;
pub mod ops;
pub mod server;

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use middom::svg::{line_plot, scatter_plot, PointSet, Series};
use middom::*;
use serde::Serialize;

pub use error::CliError;
use ops::*;

#[derive(Debug, Parser)]
#[command(name = "middom", version, about = "MID pole placement for single-delay retarded DDEs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write the result to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Root-finding and certification tolerance, in (0, 1e-3].
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form coefficients placing a root of multiplicity 2n at s0.
    Synthesize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: f64,
        #[arg(long, allow_negative_numbers = true)]
        s0: f64,
    },
    /// Checks multiplicity, dominance, factorization or the binomial identities.
    Verify {
        #[arg(long, value_enum)]
        what: What,
        /// Order of a single system; without it a random suite is checked.
        #[arg(long, requires_all = ["tau", "s0"])]
        n: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        s0: Option<f64>,
        /// Number of random systems when no single system is given.
        #[arg(long, default_value_t = 20)]
        draws: usize,
        /// Half-height of the dominance rectangle (default 40π/τ).
        #[arg(long)]
        height: Option<f64>,
        /// Largest index for the identity suite.
        #[arg(long, default_value_t = 30)]
        max_index: usize,
        /// Points per side of the factorization grid.
        #[arg(long, default_value_t = 40)]
        grid: usize,
    },
    /// Locates all roots of a quasipolynomial in a rectangle.
    Roots {
        /// JSON file with the quasipolynomial, or `-` for standard input.
        #[arg(long)]
        input: String,
        #[arg(
            long,
            num_args = 4,
            allow_negative_numbers = true,
            value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"]
        )]
        rect: Vec<f64>,
        /// Also write an SVG scatter plot of the roots.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Simulates a built-in scenario or a user-supplied system.
    Simulate {
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        scenario: Option<String>,
        /// JSON file with a simulation spec or a bare quasipolynomial, or `-`.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Window for the decay-rate fit (default: middle 60% of the run).
        #[arg(long, num_args = 2, value_names = ["T0", "T1"])]
        fit: Option<Vec<f64>>,
        /// Also write an SVG line plot of the response.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Controller designs built on the closed-form coefficients.
    Design {
        #[command(subcommand)]
        design: DesignCommand,
    },
    /// Starts the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Multiplicity,
    Dominance,
    Factorization,
    Identities,
}

#[derive(Debug, Subcommand)]
pub enum DesignCommand {
    /// Delayed feedback for y'' + 2ζω y' + ω² y = u(t − τ).
    SecondOrder {
        #[arg(long)]
        zeta: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Mach-number controller for the wind-tunnel model.
    WindTunnel {
        #[arg(long)]
        kappa: f64,
        #[arg(long = "k", visible_alias = "k-gain", allow_negative_numbers = true)]
        k_gain: f64,
        #[arg(long)]
        tau0: f64,
        #[arg(long)]
        tau1: f64,
    },
}

/// Rendered result of a command. `status` carries a failure that should
/// still be reported after the data has been written.
struct Payload {
    json: String,
    csv: String,
    svg: Option<(PathBuf, String)>,
    status: Result<(), CliError>,
}

impl Payload {
    fn new<T: Serialize>(value: &T, csv: String) -> Result<Self, CliError> {
        Ok(Payload {
            json: serde_json::to_string_pretty(value)?,
            csv,
            svg: None,
            status: Ok(()),
        })
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    if path == "-" {
        let mut text = String::new();
        stdin.read_to_string(&mut text)?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::validation(format!("{path}: {e}")))
    }
}

fn key_values(pairs: &[(&str, f64)]) -> Result<String, CliError> {
    Ok(middom::export::key_value_csv(pairs)?)
}

fn indexed<'a>(prefix: &str, values: &'a [f64]) -> Vec<(String, &'a f64)> {
    values
        .iter()
        .enumerate()
        .map(|(k, v)| (format!("{prefix}{k}"), v))
        .collect()
}

fn synthesis_csv(r: &SynthesisResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value"])?;
    let mut rows = vec![
        ("n".to_string(), r.n.to_string()),
        ("tau".to_string(), r.tau.to_string()),
        ("s0".to_string(), r.s0.to_string()),
    ];
    for (name, v) in indexed("a", &r.a).into_iter().chain(indexed("alpha", &r.alpha)) {
        rows.push((name, v.to_string()));
    }
    rows.push(("stable".to_string(), r.stable.to_string()));
    for (name, value) in rows {
        w.write_record([name, value])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::validation(e.to_string()))
}

fn verify_csv(report: &VerifyReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match report {
        VerifyReport::Multiplicity { checks, .. } => {
            w.write_record(["n", "tau", "s0", "expected", "multiplicity", "ok"])?;
            for c in checks {
                w.serialize((c.n, c.tau, c.s0, c.expected, c.multiplicity, c.ok))?;
            }
        }
        VerifyReport::Dominance { checks, .. } => {
            w.write_record(["n", "tau", "s0", "multiplicity", "count", "dominant", "ok"])?;
            for c in checks {
                let r = &c.report;
                w.serialize((c.n, c.tau, r.s0, r.multiplicity, r.count, r.dominant, c.ok))?;
            }
        }
        VerifyReport::Factorization { checks, .. } => {
            w.write_record(["n", "grid", "max_relative_residual", "ok"])?;
            for c in checks {
                w.serialize((c.n, c.grid, c.max_relative_residual, c.ok))?;
            }
        }
        VerifyReport::Identities { checks, .. } => {
            w.write_record(["max_index", "cases_checked", "ok"])?;
            for c in checks {
                w.serialize((c.max_index, c.cases_checked, c.ok))?;
            }
        }
    }
    finish_csv(w)
}

fn simulate_csv(resp: &SimulateResponse) -> Result<String, CliError> {
    match resp {
        SimulateResponse::Single(trace) => Ok(middom::export::trace_csv(trace)?),
        SimulateResponse::Scenario {
            open_loop,
            closed_loop,
            ..
        } => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "open_loop", "closed_loop"])?;
            let n = open_loop.times.len().max(closed_loop.times.len());
            let cell = |v: Option<&f64>| v.map(f64::to_string).unwrap_or_default();
            for i in 0..n {
                let t = open_loop.times.get(i).or(closed_loop.times.get(i));
                w.write_record([cell(t), cell(open_loop.y.get(i)), cell(closed_loop.y.get(i))])?;
            }
            finish_csv(w)
        }
    }
}

fn simulate_svg(resp: &SimulateResponse) -> String {
    match resp {
        SimulateResponse::Single(trace) => line_plot(
            "response",
            &[Series {
                label: "y",
                x: &trace.times,
                y: &trace.y,
            }],
        ),
        SimulateResponse::Scenario {
            scenario,
            open_loop,
            closed_loop,
            ..
        } => line_plot(
            scenario,
            &[
                Series {
                    label: "open loop",
                    x: &open_loop.times,
                    y: &open_loop.y,
                },
                Series {
                    label: "closed loop",
                    x: &closed_loop.times,
                    y: &closed_loop.y,
                },
            ],
        ),
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Payload, CliError> {
    let tol = cli.common.tol;
    check_tol(tol)?;
    match &cli.command {
        Command::Synthesize { n, tau, s0 } => {
            let r = synthesize_op(&SynthesizeRequest { n: *n, tau: *tau, s0: *s0 })?;
            Payload::new(&r, synthesis_csv(&r)?)
        }
        Command::Verify {
            what,
            n,
            tau,
            s0,
            draws,
            height,
            max_index,
            grid,
        } => {
            let case = match (n, tau, s0) {
                (Some(n), Some(tau), Some(s0)) => Some(MidCase { n: *n, tau: *tau, s0: *s0 }),
                _ => None,
            };
            let opts = VerifyOptions {
                case,
                tol,
                seed: cli.common.seed,
                draws: *draws,
                half_height: *height,
                max_index: *max_index,
            };
            let report = match what {
                What::Multiplicity => verify_multiplicity(&opts)?,
                What::Dominance => verify_dominance_op(&opts)?,
                What::Factorization => {
                    let orders: Vec<usize> = match n {
                        Some(n) => vec![*n],
                        None => (1..=5).collect(),
                    };
                    verify_factorization(&orders, *grid)?
                }
                What::Identities => verify_identities(opts.max_index)?,
            };
            let mut payload = Payload::new(&report, verify_csv(&report)?)?;
            if !report.ok() {
                payload.status = Err(CliError::numerical("verification failed"));
            }
            Ok(payload)
        }
        Command::Roots { input, rect, svg } => {
            let qp = RetardedQuasipolynomial::from_json(&read_input(input, stdin)?)?;
            let rect = Rectangle::new(rect[0], rect[1], rect[2], rect[3])?;
            let report = roots_op(&RootsRequest { qp, rect, tol })?;
            let mut payload = Payload::new(&report, middom::export::spectrum_csv(&report)?)?;
            if let Some(path) = svg {
                let points: Vec<(f64, f64, usize)> = report
                    .roots
                    .iter()
                    .map(|r| (r.re, r.im, r.multiplicity))
                    .collect();
                let plot = scatter_plot("roots", &[PointSet { label: "roots", points: &points }]);
                payload.svg = Some((path.clone(), plot));
            }
            if !report.is_complete() {
                payload.status = Err(CliError::numerical(format!(
                    "{} of {} roots located; {} subregion(s) unresolved",
                    report.located_count(),
                    report.total_count,
                    report.unresolved.len()
                )));
            }
            Ok(payload)
        }
        Command::Simulate {
            scenario,
            input,
            t_end,
            dt,
            fit,
            svg,
        } => {
            let mut req = SimulateRequest {
                scenario: scenario.clone(),
                t_end: *t_end,
                dt: *dt,
                fit: fit.as_ref().map(|f| [f[0], f[1]]),
                ..Default::default()
            };
            if let Some(path) = input {
                let text = read_input(path, stdin)?;
                match serde_json::from_str::<SimulationSpec>(&text) {
                    Ok(spec) => req.spec = Some(spec),
                    Err(_) => req.qp = Some(RetardedQuasipolynomial::from_json(&text)?),
                }
            }
            let resp = simulate_op(&req)?;
            let mut payload = Payload::new(&resp, simulate_csv(&resp)?)?;
            if let Some(path) = svg {
                payload.svg = Some((path.clone(), simulate_svg(&resp)));
            }
            Ok(payload)
        }
        Command::Design { design } => match design {
            DesignCommand::SecondOrder { zeta, omega, tau } => {
                let d = second_order_op(&SecondOrderRequest {
                    zeta: *zeta,
                    omega: *omega,
                    tau: *tau,
                })?;
                let csv = key_values(&[
                    ("zeta", d.zeta),
                    ("omega", d.omega),
                    ("tau", d.tau),
                    ("s0", d.s0),
                    ("a0", d.a0),
                    ("alpha0", d.alpha0),
                    ("alpha1", d.alpha1),
                ])?;
                Payload::new(&d, csv)
            }
            DesignCommand::WindTunnel {
                kappa,
                k_gain,
                tau0,
                tau1,
            } => {
                let d = wind_tunnel_op(&WindTunnelRequest {
                    kappa: *kappa,
                    k_gain: *k_gain,
                    tau0: *tau0,
                    tau1: *tau1,
                })?;
                Payload::new(&d, middom::export::controller_csv(&d)?)
            }
        },
        Command::Serve { .. } => unreachable!("serve is dispatched before execute"),
    }
}

fn emit(cli: &Cli, payload: &Payload, stdout: &mut dyn Write) -> Result<(), CliError> {
    let body = if cli.common.csv {
        payload.csv.clone()
    } else {
        let mut json = payload.json.clone();
        json.push('\n');
        json
    };
    match &cli.common.out {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    if let Some((path, svg)) = &payload.svg {
        fs::write(path, svg)?;
    }
    Ok(())
}

fn serve(host: &str, port: u16, stderr: &mut dyn Write) -> Result<(), CliError> {
    let addr = format!("{host}:{port}");
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::validation(format!("cannot bind {addr}: {e}")))?;
        let _ = writeln!(stderr, "listening on http://{}", listener.local_addr()?);
        axum::serve(listener, server::router()).await?;
        Ok(())
    })
}

/// Runs the command line given by `args` (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Serve { port, host } => serve(host, *port, stderr),
        _ => execute(&cli, stdin).and_then(|payload| {
            emit(&cli, &payload, stdout)?;
            payload.status
        }),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
