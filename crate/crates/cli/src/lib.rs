//! Command-line surface of the `tcladder` simulator.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ScenarioConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tcladder", version, about = "Dissipative Tavis-Cummings ladder: eigenenergies, dynamics and spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON scenario configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for datasets.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Override a configuration field, e.g. `params.gamma_a=0.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for the pseudo-random sample points of `verify`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complex eigenenergies over a parameter sweep.
    Eigen,
    /// Strong-coupling contour and Rabi splittings against γ₋/g.
    Criterion,
    /// Master-equation trajectory (and optionally G(t,τ)).
    Evolve,
    /// Filtered emission spectrum with its peak table.
    Spectrum,
    /// Run the self-check suite and print a JSON report.
    Verify {
        /// Perturb the complex Rabi frequencies by 1% (negative control).
        #[arg(long, hide = true)]
        debug_mutate_rabi: bool,
    },
}

/// Runs a parsed command and returns the files it wrote.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool configured earlier in the same process is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Command::Verify { debug_mutate_rabi } = cli.command {
        commands::cmd_verify(cli.seed, debug_mutate_rabi, cli.out.as_deref())?;
        return Ok(cli.out.iter().map(|d| d.join("verify.json")).collect());
    }
    let document = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?),
        None => None,
    };
    let config = ScenarioConfig::load(document.as_deref(), &cli.set)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Eigen => commands::cmd_eigen(&config, &out),
        Command::Criterion => commands::cmd_criterion(&config, &out),
        Command::Evolve => commands::cmd_evolve(&config, &out),
        Command::Spectrum => commands::cmd_spectrum(&config, &out),
        Command::Verify { .. } => unreachable!("handled above"),
    }
}
