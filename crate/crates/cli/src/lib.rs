//! Command-line pipeline: synthetic data, ingest, diagnostics, order
//! selection, fitting, forecasting and the standard-versus-rolling
//! evaluation.
//!
//! Settings come from built-in defaults, then the `--config` JSON file,
//! then command-line flags; later sources win.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod synth;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{execute, Command};
use config::{Overrides, RunConfig};
use error::{CliResult, EXIT_OK, EXIT_PARTIAL};
use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "trafficcast", version, about = "Network traffic forecasting with ARIMA-family and Holt-Winters models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Raw telemetry file for `ingest`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Run directory for every output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Rows of the ranked grid printed to stdout.
    #[arg(long, global = true)]
    pub top: Option<usize>,
    /// Re-estimate parameters every n rolling steps.
    #[arg(long, global = true)]
    pub refit_interval: Option<usize>,
    /// Rolling mode only updates the state; parameters stay fixed.
    #[arg(long, global = true)]
    pub filter_only: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Cmd {
    /// Write seeded synthetic telemetry (JSON, bits per second).
    Synth,
    /// Raw telemetry to the canonical Gbps CSV.
    Ingest,
    /// Train/test split and calendar features.
    Preprocess,
    /// ADF tests, ACF/PACF and additive decomposition.
    Diagnose,
    /// AIC grid search over ARIMA orders.
    Gridsearch,
    /// Fit one model on the training window.
    Fit,
    /// Forecast past the training window with a fitted model.
    Forecast,
    /// Standard and rolling MAPE for every configured model.
    Evaluate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Synth => Command::Synth,
            Cmd::Ingest => Command::Ingest,
            Cmd::Preprocess => Command::Preprocess,
            Cmd::Diagnose => Command::Diagnose,
            Cmd::Gridsearch => Command::Gridsearch,
            Cmd::Fit => Command::Fit,
            Cmd::Forecast => Command::Forecast,
            Cmd::Evaluate => Command::Evaluate,
        }
    }
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            input: self.input.clone(),
            out: self.out.clone(),
            seed: self.seed,
            jobs: self.jobs,
            top: self.top,
            refit_interval: self.refit_interval,
            filter_only: self.filter_only,
        }
    }

    pub fn effective_config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> CliResult<i32> {
    let cfg = cli.effective_config()?;
    let cmd = Command::from(cli.command);
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let clock = Instant::now();
    let outcome = execute(cmd, &cfg)?;
    let status = if outcome.partial { "partial" } else { "ok" };
    let manifest = Manifest {
        command: cmd.name(),
        status,
        versions: manifest::versions(),
        seed: cfg.seed,
        jobs: cfg.jobs,
        config: &cfg,
        started_at,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
        items: &outcome.items,
    };
    manifest::write(&cfg.output_dir, &manifest)?;
    if outcome.partial {
        let failed: Vec<String> = outcome
            .items
            .iter()
            .filter(|i| i.status != "ok" && i.status != "converged")
            .map(|i| format!("{} ({})", i.name, i.status))
            .collect();
        eprintln!("partial failure: {}", failed.join(", "));
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
