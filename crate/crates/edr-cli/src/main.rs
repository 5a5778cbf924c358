//! `edrlab` — error-disturbance laboratory for linear position measurements.

mod commands;
mod config;
mod error;
mod report_cmd;
mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::spec::ModelSpec;

#[derive(Parser)]
#[command(
    name = "edrlab",
    version,
    about = "Solve linear position-measurement models, compute RMS error and momentum \
             disturbance in closed form and against an FFT wavefunction oracle, and evaluate \
             supremum-based error-disturbance products."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the dynamics and print the transfer matrix and regime
    Solve(SolveArgs),
    /// Analyze one model/state pair; prints a JSON report
    Analyze(AnalyzeArgs),
    /// Sweep a model family and emit one CSV row per parameter point
    Sweep(SweepArgs),
    /// Constrained-supremum estimates with their analytic counterparts
    Blw(BlwArgs),
    /// Run the reproduction suite and write a manifest plus artifacts
    Report(ReportArgs),
    /// Export or inspect sampled wavefunctions
    State(StateArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Preset: von-neumann | error-free:a=<x> | coupling:alpha=..,beta=..,gamma=..
    #[arg(long, conflicts_with_all = ["alpha", "beta", "gamma"])]
    preset: Option<String>,
    /// Coupling of the position-exchange term
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Coupling of the probe back-action term
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Coupling of the meter readout term
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
}

impl ModelArgs {
    fn to_spec(&self) -> Result<ModelSpec, CliError> {
        if let Some(preset) = &self.preset {
            return preset.parse();
        }
        if self.alpha.is_none() && self.beta.is_none() && self.gamma.is_none() {
            return Err(CliError::Usage(
                "specify a model with --preset or at least one of --alpha/--beta/--gamma".into(),
            ));
        }
        Ok(ModelSpec::Coupling {
            alpha: self.alpha.unwrap_or(0.0),
            beta: self.beta.unwrap_or(0.0),
            gamma: self.gamma.unwrap_or(0.0),
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Emit JSON instead of the human-readable lines
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Object state spec
    #[arg(long)]
    psi: String,
    /// Probe state spec
    #[arg(long)]
    xi: String,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Also run the grid oracle and embed the comparison
    #[arg(long)]
    oracle: bool,
    /// Grid size for the oracle (power of two, default from config)
    #[arg(long)]
    grid_n: Option<usize>,
    /// Grid half-width in standard deviations (default from config)
    #[arg(long)]
    span: Option<f64>,
    /// Append one CSV row to this file
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Config file (default: $EDRLAB_CONFIG, then built-in defaults)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Which parameter varies: a (error-free gain) | alpha | beta | gamma
    #[arg(long)]
    vary: String,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    /// Number of points; zero is an empty family and is rejected
    #[arg(long)]
    steps: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value = "ground")]
    psi: String,
    #[arg(long, default_value = "ground")]
    xi: String,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlwArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Probe state spec
    #[arg(long, default_value = "ground")]
    xi: String,
    /// Width of the approximate eigenstates swept
    #[arg(long)]
    eps_eig: f64,
    /// Comma-separated reference-point magnitudes
    #[arg(long)]
    theta_magnitudes: Option<String>,
    /// Comma-separated width divisors
    #[arg(long)]
    width_divisors: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Config file (default: $EDRLAB_CONFIG, then built-in defaults)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the manifest and artifacts
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StateArgs {
    /// State spec to export
    #[arg(long, required_unless_present = "inspect")]
    spec: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 4096)]
    grid_n: usize,
    #[arg(long, default_value_t = 12.0)]
    span: f64,
    /// Output path for the exported wavefunction
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json (inferred from --out extension when omitted)
    #[arg(long)]
    format: Option<String>,
    /// Read a wavefunction file and print its grid moments
    #[arg(long)]
    inspect: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => commands::solve(&args.model.to_spec()?, args.hbar, args.json),
        Command::Analyze(args) => {
            let config = config::load(args.config.as_deref())?;
            commands::analyze(
                &args.model.to_spec()?,
                &args.psi.parse()?,
                &args.xi.parse()?,
                args.hbar,
                args.oracle,
                args.grid_n.unwrap_or(config.grid.n),
                args.span.unwrap_or(config.grid.span_sigmas),
                args.csv.as_deref(),
            )
        }
        Command::Sweep(args) => commands::sweep(&args),
        Command::Blw(args) => {
            let config = config::load(args.config.as_deref())?;
            commands::blw(&args, &config)
        }
        Command::Report(args) => {
            let config = config::load(args.config.as_deref())?;
            report_cmd::run(&config, &args.out)
        }
        Command::State(args) => commands::state(&args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.code());
    }
}
