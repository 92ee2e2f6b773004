//! Command-line driver: configuration, subcommands and output files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qradar::fitkit::Calibration;

pub use commands::{run, Command, Report};
pub use config::{Overrides, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qradar", version, about = "Microwave quantum-illumination radar simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CommandArg {
    /// Classical and quantum error-exponent bounds and the optimal gain.
    Bounds,
    /// Error exponent versus receiver gain, model and Monte Carlo.
    Fig3,
    /// Model quantum advantage over signal, noise and signal impurity.
    Fig4,
    /// Monte Carlo tallies at one operating point.
    Simulate,
    /// Fit synthetic calibration data with known truth.
    Calibrate,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Bounds => Command::Bounds,
            CommandArg::Fig3 => Command::Fig3,
            CommandArg::Fig4 => Command::Fig4,
            CommandArg::Simulate => Command::Simulate,
            CommandArg::Calibrate => Command::Calibrate,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub n_signal: Option<f64>,
    #[arg(long, global = true)]
    pub n_noise: Option<f64>,
    /// Reflectivity with the target present.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub gain: Option<f64>,
    #[arg(long, global = true)]
    pub nth_signal: Option<f64>,
    #[arg(long, global = true)]
    pub nth_idler: Option<f64>,
    #[arg(long, global = true)]
    pub eta_idler: Option<f64>,
    /// Trials per hypothesis.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Gain axis as a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub gains: Option<Vec<f64>>,
    /// Calibration to run.
    #[arg(long, global = true)]
    pub kind: Option<Calibration>,
}

impl GlobalOpts {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            n_signal: self.n_signal,
            n_noise: self.n_noise,
            kappa: self.kappa,
            g_rx: self.gain,
            nth_signal: self.nth_signal,
            nth_idler: self.nth_idler,
            eta_idler: self.eta_idler,
            m_trials: self.trials,
            gains: self.gains.clone(),
            calibration: self.kind,
        }
    }

    /// File configuration (or defaults) with the flags applied.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply(self.overrides());
        Ok(config)
    }
}

/// Runs `command` on a pool of `threads` workers.
pub fn run_with_threads(command: Command, config: &RunConfig, threads: Option<usize>) -> Result<Report, CliError> {
    match threads {
        None => run(command, config),
        Some(0) => Err(CliError::Config("`--threads` must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| run(command, config)),
    }
}

/// Resolves the configuration, runs, and writes `<out>/result.csv` and
/// `<out>/summary.json`.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let config = cli.opts.resolve()?;
    let command = Command::from(cli.command);
    let report = run_with_threads(command, &config, cli.opts.threads)?;
    let extra: Vec<(&str, &output::Table)> = report.extra.iter().map(|(n, t)| (n.as_str(), t)).collect();
    output::write_outputs(&config.out_dir(), &report.table, &extra, &report.summary(command, &config))?;
    Ok(report)
}
