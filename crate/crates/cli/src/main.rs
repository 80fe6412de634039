//! `meseq` — experiment runner for measure-sequence harmonic analysis.
//!
//! Reads a TOML experiment config, dispatches one subcommand, writes CSV
//! artifacts (and optional SVG plots) into the output directory, prints a
//! verdict line per checked statement, and exits 0 only if every verdict
//! came out as expected.

mod config;
mod jobs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "meseq",
    version,
    about = "Measure-sequence harmonic analysis experiments"
)]
struct Cli {
    /// Experiment config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG plots of the CSV data
    #[arg(long, global = true)]
    svg: bool,
    /// Override a tolerance, e.g. --tol-override convergence=1e-4 or
    /// goldstein=5e-3 (repeatable)
    #[arg(long = "tol-override", global = true, value_name = "KEY=VALUE")]
    tol_override: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Averaged squared transform ‖μ̂‖²_N vs its limit candidates
    Wiener,
    /// Koopman–von Neumann equivalence probe for a bounded function
    Kvn,
    /// c_ν(g) partial values on a list of points
    Cvalue,
    /// ν_N(J) density estimates for a list of sets
    Density,
    /// Isometric/stable splitting and eigenprojections of a system
    Decompose,
    /// Mean limit ∫|(T_m x|y)|²ν_N(dm) vs Σ|(P_a x|y)|²
    Goldstein,
    /// Extremality probe of a sequence on a grid
    Extremal,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config_path) = cli.config.clone() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let mut experiment = match config::load(&config_path) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        experiment.out = out;
    }
    for spec in &cli.tol_override {
        if let Err(e) = apply_tol_override(&mut experiment, spec) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Wiener => jobs::run_wiener(&experiment, cli.svg),
        Command::Kvn => jobs::run_kvn(&experiment, cli.svg),
        Command::Cvalue => jobs::run_cvalue(&experiment, cli.svg),
        Command::Density => jobs::run_density(&experiment, cli.svg),
        Command::Decompose => jobs::run_decompose(&experiment),
        Command::Goldstein => jobs::run_goldstein(&experiment, cli.svg),
        Command::Extremal => jobs::run_extremal(&experiment),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn apply_tol_override(experiment: &mut config::Experiment, spec: &str) -> config::CliResult<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| format!("tolerance override `{spec}` must be key=value"))?;
    let value: f64 = value
        .parse()
        .map_err(|e| format!("tolerance override `{spec}`: {e}"))?;
    if !(value > 0.0) {
        return Err(format!("tolerance override `{spec}` must be positive").into());
    }
    match key {
        "convergence" => experiment.schedule.tol = value,
        "goldstein" => experiment.tol_goldstein = value,
        other => return Err(format!("unknown tolerance key `{other}`").into()),
    }
    Ok(())
}
