//! Command-line front end for the variance-update diagnostics: Matrix Market
//! and CSV ingestion, `check` / `plot` / `generate` commands, atomic output.

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod mtx;

pub use error::{CliError, Result, Status};

use cli::{resolve_check, resolve_generate, resolve_plot, Cli, Command};

pub const THREADS_ENV: &str = "MEDAL_NUM_THREADS";

pub fn run(cli: Cli) -> Result<Status> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => log::debug!("{THREADS_ENV}={n} noted; pipelines run on one thread"),
            _ => log::warn!("ignoring {THREADS_ENV}={v:?}: expected a positive integer"),
        }
    }
    match cli.command {
        Command::Check(args) => commands::cmd_check(&resolve_check(args)?),
        Command::Plot(args) => commands::cmd_plot(&resolve_plot(args)?),
        Command::Generate(args) => commands::cmd_generate(&resolve_generate(args)?),
    }
}
