//! `logicint` — run a configured decomposition task and write its report.
//!
//! Exit codes: 0 success, 2 config parse error, 3 contract violation,
//! 4 size limit.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ConfigError;
use crate::runner::RunError;

#[derive(Parser)]
#[command(name = "logicint", version, about = "phased sums over classical gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the task described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed (overrides the config's `task.seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
}

fn exit_code_for(e: &logicint::Error) -> u8 {
    match e {
        logicint::Error::SizeLimit(_) => 4,
        _ => 3,
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        RunError::Config(ConfigError::Parse(_)) => ExitCode::from(2),
        RunError::Config(ConfigError::Semantic(ref err)) => ExitCode::from(exit_code_for(err)),
        RunError::Io(_) => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed } => {
            match runner::run(&config, out.as_deref(), seed) {
                Ok(outcome) => {
                    println!("report: {}", outcome.report_path.display());
                    if let Some(trace) = outcome.trace_path {
                        println!("trace: {}", trace.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => match runner::validate(&config) {
            Ok(cfg) => {
                println!(
                    "ok: {} task on {} sites, {} bonds",
                    cfg.task.kind.name(),
                    cfg.system.sites,
                    cfg.system.bonds.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(RunError::Config(e)),
        },
    }
}
