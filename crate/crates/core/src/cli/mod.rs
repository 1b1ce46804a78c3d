//! Command-line front end of the `polmax` binary.
//!
//! Every command writes its data to standard output (or `--out`), either as
//! a JSON [`OutputEnvelope`] or as CSV, and its diagnostics to standard
//! error.

mod commands;
pub mod format;
mod verify;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use commands::{
    cmd_degree, cmd_figures, cmd_optimal, cmd_sweep, ClosedFormOptimum, FiguresReport,
    OptimalMethod, OptimalPayload, SweepRecord, FIG1_DIM, FIG3_DIM,
};
pub use format::{csv_number, OutputEnvelope, SCHEMA_VERSION};
pub use verify::{run_verify, CheckOutcome, KktInstance, VerifyReport, DEFAULT_SEED};

use crate::distributions::{twin_beam_squeezing_for_mean, PhotonDistribution, StateSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// `verify` ran but at least one check failed; the report was written.
    #[error("{0} self-check(s) failed")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "polmax",
    version,
    about = "Degree of polarization and maximally polarized photon statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree of polarization of a catalog state.
    Degree(DegreeArgs),
    /// Maximally polarized photon-number distribution at fixed mean.
    Optimal(OptimalArgs),
    /// Degrees, Mandel Q and support size over a grid of mean photon numbers.
    Sweep(SweepArgs),
    /// Data tables behind the optimum-distribution figures.
    Figures(FiguresArgs),
    /// KKT and oracle self-checks; exits nonzero on any failure.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Nphoton,
    Su2,
    Coherent,
    Twin,
    Thermal,
    Custom,
}

#[derive(Debug, Args)]
pub struct DegreeArgs {
    #[arg(long, value_enum)]
    pub state: StateKind,
    /// Photon number (nphoton, su2).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Mean photon number (coherent, thermal, twin).
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Squeezing parameter (twin).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Comma-separated p_0,p_1,... (custom).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub probs: Option<Vec<f64>>,
    /// Purity Tr(rho^2) (custom only).
    #[arg(long, default_value_t = 1.0)]
    pub purity: f64,
}

#[derive(Debug, Args)]
pub struct OptimalArgs {
    #[arg(long)]
    pub nbar: f64,
    /// Truncation dimension (defaults to ceil(2 nbar) + 4).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum, default_value_t = OptimalMethod::Qp)]
    pub method: OptimalMethod,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub start: f64,
    #[arg(long)]
    pub end: f64,
    #[arg(long, default_value_t = 0.2)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Directory receiving fig1.csv, fig2.csv and fig3.csv.
    #[arg(long, default_value = ".")]
    pub outdir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of random (nbar, D) instances for the KKT audit.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
}

fn state_from_args(args: &DegreeArgs) -> Result<(StateSpec, BTreeMap<String, Value>), CliError> {
    let mut params = BTreeMap::new();
    let need_n = || {
        args.n
            .ok_or_else(|| usage("--n is required for this state"))
    };
    let need_nbar = || {
        args.nbar
            .ok_or_else(|| usage("--nbar is required for this state"))
    };
    let state = match args.state {
        StateKind::Nphoton => {
            let n = need_n()?;
            params.insert("state".into(), json!("nphoton"));
            params.insert("n".into(), json!(n));
            params.insert("k".into(), json!(args.k));
            StateSpec::NPhotonPure { n, k: args.k }
        }
        StateKind::Su2 => {
            let n = need_n()?;
            let theta = args
                .theta
                .ok_or_else(|| usage("--theta is required for su2"))?;
            params.insert("state".into(), json!("su2"));
            params.insert("n".into(), json!(n));
            params.insert("theta".into(), json!(theta));
            params.insert("phi".into(), json!(args.phi));
            StateSpec::Su2Coherent {
                n,
                theta,
                phi: args.phi,
            }
        }
        StateKind::Coherent => {
            let nbar = need_nbar()?;
            params.insert("state".into(), json!("coherent"));
            params.insert("nbar".into(), json!(nbar));
            StateSpec::QuadratureCoherent { nbar }
        }
        StateKind::Thermal => {
            let nbar = need_nbar()?;
            params.insert("state".into(), json!("thermal"));
            params.insert("nbar".into(), json!(nbar));
            StateSpec::ThermalTotal { nbar }
        }
        StateKind::Twin => {
            let xi = match (args.xi, args.nbar) {
                (Some(xi), None) => xi,
                (None, Some(nbar)) => {
                    twin_beam_squeezing_for_mean(nbar).map_err(|e| usage(e.to_string()))?
                }
                _ => return Err(usage("twin needs exactly one of --xi or --nbar")),
            };
            params.insert("state".into(), json!("twin"));
            params.insert("xi".into(), json!(xi));
            StateSpec::TwinBeam { xi }
        }
        StateKind::Custom => {
            let probs = args
                .probs
                .clone()
                .ok_or_else(|| usage("--probs is required for custom"))?;
            params.insert("state".into(), json!("custom"));
            params.insert("probs".into(), json!(probs));
            StateSpec::Custom {
                dist: PhotonDistribution::from_probs(probs).map_err(|e| usage(e.to_string()))?,
            }
        }
    };
    params.insert("purity".into(), json!(args.purity));
    state.validate().map_err(|e| usage(e.to_string()))?;
    Ok((state, params))
}

/// Text a command prints, plus the number of failed self-checks (`verify`).
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub failed_checks: usize,
}

impl From<String> for Rendered {
    fn from(text: String) -> Self {
        Self {
            text,
            failed_checks: 0,
        }
    }
}

/// Executes a parsed command and returns what it would print.
pub fn render(cli: &Cli) -> Result<Rendered, CliError> {
    match &cli.command {
        Command::Degree(args) => {
            let (state, params) = state_from_args(args)?;
            let result = cmd_degree(&state, args.purity).map_err(|e| match e {
                crate::Error::Domain(msg) => usage(msg),
                other => other.into(),
            })?;
            Ok(commands::render_degree(&result, params, cli.format).into())
        }
        Command::Optimal(args) => {
            let payload = cmd_optimal(args.nbar, args.dim, args.method)?;
            let mut params = BTreeMap::new();
            params.insert("nbar".into(), json!(args.nbar));
            params.insert("dim".into(), json!(args.dim));
            params.insert(
                "method".into(),
                json!(format!("{:?}", args.method).to_lowercase()),
            );
            Ok(commands::render_optimal(&payload, params, cli.format).into())
        }
        Command::Sweep(args) => {
            let rows = cmd_sweep(args.start, args.end, args.step)?;
            let mut params = BTreeMap::new();
            params.insert("start".into(), json!(args.start));
            params.insert("end".into(), json!(args.end));
            params.insert("step".into(), json!(args.step));
            Ok(commands::render_sweep(&rows, params, cli.format).into())
        }
        Command::Figures(args) => {
            let report = cmd_figures(&args.outdir)?;
            let mut params = BTreeMap::new();
            params.insert("outdir".into(), json!(args.outdir.display().to_string()));
            Ok(commands::render_figures(&report, params, cli.format).into())
        }
        Command::Verify(args) => {
            let report = run_verify(args.seed, args.instances);
            let mut params = BTreeMap::new();
            params.insert("seed".into(), json!(args.seed));
            params.insert("instances".into(), json!(args.instances));
            Ok(Rendered {
                text: verify::render(&report, params, cli.format),
                failed_checks: report.failed_checks(),
            })
        }
    }
}

/// Runs the command and writes its output; `verify` failures are reported
/// after the output is written.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let Rendered {
        text,
        failed_checks,
    } = render(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    if failed_checks > 0 {
        return Err(CliError::VerificationFailed(failed_checks));
    }
    Ok(())
}
