use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Fit zero-adjusted regression models and check them with residual
/// diagnostics.
#[derive(Debug, Parser)]
#[command(name = "zar", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write the coefficient table and a fit artifact.
    Fit(FitArgs),
    /// Compute residuals from a fit artifact and write plot data.
    Diagnose(DiagnoseArgs),
    /// Build a half-normal plot envelope by simulation and refitting.
    Envelope(EnvelopeArgs),
    /// Run a Monte Carlo calibration study of residual tails.
    Simulate(SimulateArgs),
    /// Write a synthetic exam-score dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for every random draw of the command.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    /// Fit artifact; defaults to `<out>/fit.json`.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Comma-separated residual kinds, e.g. `rq,zaqr`.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Residual kind; defaults to `zaqr`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Number of simulated replicates (at least 19).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// `LOWER,UPPER` percentiles or `minmax`.
    #[arg(long)]
    pub band: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Covariate table used as fixed covariates when the scenario does not
    /// generate its own.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Worker threads; the report does not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of rows.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}
