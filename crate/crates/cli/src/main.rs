//! Command-line front end for the crane safety-filter toolkit.
//!
//! `simulate` runs the configured scenario and writes one CSV per controller
//! plus a manifest that can itself be re-run as a config. `compare` prints a
//! four-controller comparison table. `verify-thresholds` sweeps the margin
//! thresholds against a brute-force level-set oracle. `selftest` runs the
//! library's property-check battery.
//!
//! Exit codes: 0 success, 2 configuration error, 3 safety-contract
//! violation, 4 solver failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dsm_cbf::Error;

use crate::config::ConfigFile;

#[derive(Parser)]
#[command(
    name = "dsm-cbf",
    about = "Constrained-control safety filters on an overhead-crane study plant",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write CSV trajectories plus a manifest
    Simulate(RunArgs),
    /// Run all four controllers and print a comparison table
    Compare(RunArgs),
    /// Sweep margin thresholds against the brute-force level-set oracle
    VerifyThresholds {
        /// Scenario configuration file
        #[arg(long)]
        config: PathBuf,
        /// Grid points per state axis in the oracle
        #[arg(long, default_value_t = 61)]
        resolution: usize,
        /// Number of virtual-reference points in the sweep
        #[arg(long, default_value_t = 23)]
        v_points: usize,
    },
    /// Run the library's property-check battery
    Selftest {
        /// Seed for the randomized checks
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (required for simulate, optional for compare)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured integration step (s)
    #[arg(long)]
    dt: Option<f64>,
    /// Override the configured run length (s)
    #[arg(long)]
    horizon: Option<f64>,
    /// Which controller(s) to run
    #[arg(long, default_value = "all")]
    controller: String,
    /// Seed recorded in the manifest and used by randomized sweeps
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    /// Loads the config with the command-line overrides folded in, so the
    /// manifest echo reproduces the run without the flags.
    fn load(&self) -> Result<ConfigFile, Error> {
        let mut cfg = ConfigFile::load(&self.config)?;
        if let Some(dt) = self.dt {
            cfg.run.dt = dt;
        }
        if let Some(horizon) = self.horizon {
            cfg.run.horizon = horizon;
        }
        Ok(cfg)
    }
}

fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::DomainViolation { .. } => ExitCode::from(2),
        Error::ContractViolation(_) => ExitCode::from(3),
        Error::SolverFailure(_) => ExitCode::from(4),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Simulate(args) => {
            let out = args.out.as_deref().ok_or_else(|| {
                Error::Config("simulate needs --out <dir> for its CSV files".to_string())
            })?;
            let cfg = args.load()?;
            let controllers = commands::parse_controllers(&args.controller)?;
            commands::cmd_simulate(
                &cfg,
                &args.config.display().to_string(),
                out,
                &controllers,
                args.seed,
            )
        }
        Command::Compare(args) => {
            let cfg = args.load()?;
            commands::cmd_compare(
                &cfg,
                &args.config.display().to_string(),
                args.out.as_deref(),
                args.seed,
            )
        }
        Command::VerifyThresholds {
            config,
            resolution,
            v_points,
        } => {
            let cfg = ConfigFile::load(config)?;
            commands::cmd_verify_thresholds(&cfg, *resolution, *v_points)
        }
        Command::Selftest { seed } => commands::cmd_selftest(*seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
