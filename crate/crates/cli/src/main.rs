//! `polsim`: scenario runs, reference figures and parameter sweeps for
//! two-species polariton condensates in a gain/loss double well.

mod config;
mod csvout;
mod error;
mod gnuplot;
mod reproduce;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "polsim", version, about = "Two-species polariton double-well simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write CSV output.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "polsim-out")]
        out: PathBuf,
    },
    /// Regenerate the data behind a reference figure or table (`all` for every one).
    Reproduce {
        figure_id: String,
        /// Defaults to `out/<figure-id>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate stability or gate fidelity over a parameter grid.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "polsim-out")]
        out: PathBuf,
    },
    /// List the figure ids accepted by `reproduce`.
    ListFigures,
}

/// Installs the global thread pool when `POLSIM_THREADS` is set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("POLSIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("POLSIM_THREADS: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("POLSIM_THREADS: {e}")))
}

fn execute(command: Command) -> Result<(), CliError> {
    configure_threads()?;
    match command {
        Command::Run { config, out } => {
            let summary = run::run_scenario(&config, &out)?;
            if let Some(tau) = summary.trajectory.as_ref().and_then(|t| t["diverged_at"].as_f64()) {
                eprintln!("trajectory diverged at tau = {tau}");
            }
            println!("wrote {} files to {}", summary.files.len(), out.display());
        }
        Command::Reproduce { figure_id, out } => {
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(&figure_id));
            reproduce::reproduce(&figure_id, &out)?;
            println!("wrote {} to {}", figure_id, out.display());
        }
        Command::Sweep { config, out } => {
            let summary = sweep::run_sweep(&config, &out)?;
            println!("wrote {} rows to {}", summary["rows"], out.join("sweep.csv").display());
        }
        Command::ListFigures => {
            for (id, description) in reproduce::FIGURES {
                println!("{id:<15} {description}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
