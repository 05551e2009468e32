//! Command-line orchestration over `hrc-core`: problem ingestion, solver
//! runs, property suites and deterministic artifact emission.
//!
//! Every command writes its tables and reports to `--out-dir` together with
//! `problem.json` (the problem with its numerics block filled in by the
//! resolved settings) and `manifest.json` (settings, grid, tool version,
//! wall-clock time and SHA-256 digests of all other outputs). Re-running a
//! command on `problem.json` reproduces every CSV byte for byte, for any
//! thread count.

pub mod args;
mod commands;
pub mod error;
pub mod input;
pub mod output;

pub use args::{Cli, Command, CommonArgs, Fixture};
pub use error::CliError;

/// Runs one parsed invocation on a thread pool of the resolved size.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    commands::dispatch(cli)
}
