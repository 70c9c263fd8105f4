//! Command-line front end: configure, run and report optimiser experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod problem;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::problem::Problem;

#[derive(Debug, Parser)]
#[command(name = "baryopt", version, about = "Gibbs-barycentre optimisation on compact symmetric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Replace the configured seed list with this single seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed_override: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "baryopt-out")]
    pub out: PathBuf,

    /// Worker threads (falls back to BARYOPT_THREADS, then all cores).
    #[arg(long, global = true, value_name = "N", env = "BARYOPT_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Run the optimiser for every seed and write trajectories and a summary.
    Optimize,
    /// Estimate the minimiser profile and solve for the temperature thresholds.
    Temperatures,
    /// Check the concentration and convexity bounds on a temperature grid.
    VerifyBounds,
    /// Run the optimiser and simulated annealing side by side.
    Compare,
}

pub fn run(cli: &Cli) -> CliResult<i32> {
    let path = cli.config.as_ref().ok_or_else(|| error::CliError::Config {
        path: "--config".into(),
        message: "a configuration file is required".into(),
    })?;
    let cfg = RunConfig::load(path)?.resolve(cli.seed_override)?;
    let out = &cli.out;
    match Problem::build(&cfg)? {
        Problem::Sphere { m, u, zonal } => match cli.command {
            Command::Optimize => commands::cmd_optimize(&m, &u, zonal.as_ref(), &cfg, out),
            Command::Temperatures => commands::cmd_temperatures(&m, &u, &cfg, out),
            Command::VerifyBounds => commands::cmd_verify_bounds(&m, &u, &cfg, out),
            Command::Compare => commands::cmd_compare(&m, &u, &cfg, out),
        },
        Problem::Grassmann { m, u } => match cli.command {
            Command::Optimize => commands::cmd_optimize(&m, &u, None, &cfg, out),
            Command::Temperatures => commands::cmd_temperatures(&m, &u, &cfg, out),
            Command::VerifyBounds => commands::cmd_verify_bounds(&m, &u, &cfg, out),
            Command::Compare => commands::cmd_compare(&m, &u, &cfg, out),
        },
    }
}
