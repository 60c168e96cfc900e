//! Experiment runner: one experiment per invocation, reproducible by
//! construction.
//!
//! Exit status: 0 all checks pass, 1 check failure, 2 configuration
//! error, 3 numeric certification failure.

mod config;
mod experiments;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "linproc",
    about = "Verification laboratory for CLTs of stationary linear processes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration file.
    Run {
        /// Path to the configuration file.
        config: PathBuf,
        /// Worker threads for replicate evaluation (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory for reports and traces (default: ".").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the model, map, weight and coefficient catalogs.
    ListModels,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListModels => {
            print!("{}", experiments::catalog_text());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            workers,
            out,
            seed,
        } => run_command(&config, workers, out, seed),
    }
}

fn run_command(
    config_path: &PathBuf,
    workers: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> ExitCode {
    let raw = match std::fs::read_to_string(config_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read `{}`: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let parsed: config::ConfigFile = match serde_json::from_str(&raw) {
        Ok(c) => c,
        Err(e) => {
            // serde_json reports line and column.
            eprintln!("error: config parse failure: {e}");
            return ExitCode::from(2);
        }
    };

    let worker_count = workers.unwrap_or_else(num_threads_default);
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return ExitCode::from(2);
        }
    };

    let outcome = pool.install(|| experiments::run(&parsed, seed));
    match outcome {
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.status() as u8)
        }
        Ok(outcome) => {
            for line in &outcome.verdict_lines {
                println!("{line}");
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from("."));
            if let Err(e) = experiments::write_artifacts(&out_dir, &outcome, worker_count) {
                eprintln!("error: cannot write artifacts: {e}");
                return ExitCode::from(2);
            }
            if outcome.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
