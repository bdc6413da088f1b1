// SPDX-License-Identifier: Apache-2.0

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use cpfilter::SequenceId;
use cpfilter_cli::{CliError, Overrides, RunConfig};

/// Filter-function, dc-limit and Monte Carlo robustness analysis of
/// composite pulses. Writes plot-ready CSV.
#[derive(Debug, Parser)]
#[command(name = "cpfilter", version)]
struct Cli {
    /// JSON run configuration; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sequences to run, replacing the configured list.
    #[arg(long = "seq", global = true, value_delimiter = ',', value_parser = parse_seq)]
    seq: Vec<SequenceId>,
    /// Noise knee frequencies in rad/s, replacing every enabled ω_b grid.
    #[arg(long = "omega-b", global = true, value_delimiter = ',')]
    omega_b: Vec<f64>,
    /// Monte Carlo realizations per point.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Base Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = "CPFILTER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter functions on a frequency grid, one file per sequence.
    Ff,
    /// Filter-function, dc and combined loss over the ω_b grids.
    Sweep,
    /// Monte Carlo ensembles over the ω_b grids.
    Mc,
    /// Vector chains and crossover bounds.
    Geometry,
    /// Leading dc coefficients.
    DcFit,
}

fn parse_seq(s: &str) -> Result<SequenceId, String> {
    s.parse().map_err(|e: cpfilter::Error| e.to_string())
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.clone(),
                source,
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        sequences: cli.seq.clone(),
        omega_b: cli.omega_b.clone(),
        n: cli.n,
        seed: cli.seed,
        out: cli.out.clone(),
    });
    Ok(config)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let config = load(cli)?;
    match cli.command {
        Command::Ff => cpfilter_cli::run_ff(&config),
        Command::Sweep => cpfilter_cli::run_sweep(&config),
        Command::Mc => cpfilter_cli::run_mc(&config),
        Command::Geometry => cpfilter_cli::run_geometry(&config),
        Command::DcFit => cpfilter_cli::run_dc_fit(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
