//! `schrodsim <experiment> --config <path> [--out <dir>] [--seed <int>]`
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 resource cap.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sha2::{Digest, Sha256};

use config::Experiment;
use schrodsim_core::CoreError;

#[derive(Parser)]
#[command(name = "schrodsim", version, about = "Schrödingerization experiment driver")]
struct Cli {
    /// Which experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,

    /// Path to the JSON configuration for this run.
    #[arg(long)]
    config: PathBuf,

    /// Output directory for CSV tables and the run manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Seed override for random-instance experiments.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
pub enum RunError {
    Validation(String),
    Resource(String),
    Other(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parameter(_)
            | CoreError::Dimension(_)
            | CoreError::Precondition(_) => RunError::Validation(e.to_string()),
            CoreError::Resource(_) => RunError::Resource(e.to_string()),
            other => RunError::Other(other.to_string()),
        }
    }
}

impl From<config::ConfigError> for RunError {
    fn from(e: config::ConfigError) -> Self {
        RunError::Validation(e.to_string())
    }
}

pub fn thread_count() -> usize {
    rayon::current_num_threads()
}

fn init_thread_pool() -> Result<(), RunError> {
    if let Ok(v) = std::env::var("SCHRODSIM_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| RunError::Validation(format!("SCHRODSIM_THREADS={v} is not a number")))?;
        if n == 0 {
            return Err(RunError::Validation("SCHRODSIM_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Other(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, RunError> {
    init_thread_pool()?;
    let raw = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Validation(format!("cannot read {}: {e}", cli.config.display())))?;
    let digest = format!("{:x}", Sha256::digest(raw.as_bytes()));
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| RunError::Other(format!("cannot create {}: {e}", cli.out.display())))?;

    let resolved: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| RunError::Validation(e.to_string()))?;

    macro_rules! dispatch {
        ($ty:ty, $runner:expr) => {{
            let cfg: $ty = config::parse(&raw, cli.experiment)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            let ctx = experiments::RunContext {
                out_dir: &cli.out,
                digest,
                seed,
                resolved,
            };
            $runner(&cfg, &ctx)
        }};
    }

    match cli.experiment {
        Experiment::OdeSchrod => dispatch!(config::OdeSchrodConfig, experiments::run_ode_schrod),
        Experiment::FpConservation1 => {
            dispatch!(config::FpEvolveConfig, |cfg, ctx| experiments::run_fp_conservation(
                cfg, ctx, false
            ))
        }
        Experiment::FpConservation2 => {
            dispatch!(config::FpEvolveConfig, |cfg, ctx| experiments::run_fp_conservation(
                cfg, ctx, true
            ))
        }
        Experiment::FpHeatSplit => {
            dispatch!(config::FpHeatSplitConfig, experiments::run_fp_heat_split)
        }
        Experiment::FpFdCircuit => {
            dispatch!(config::FpFdCircuitConfig, experiments::run_fp_fd_circuit)
        }
        Experiment::EigScan => dispatch!(config::EigScanConfig, experiments::run_eig_scan),
        Experiment::ShiftVerify => {
            dispatch!(config::ShiftVerifyConfig, experiments::run_shift_verify)
        }
        Experiment::SplittingVerify => {
            dispatch!(config::SplittingVerifyConfig, experiments::run_splitting_verify)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(RunError::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
