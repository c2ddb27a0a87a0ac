//! The `ntf` command-line pipeline: ingest match records, scan ranks, analyze
//! a fitted model, or generate synthetic data. Every artifact is plain CSV or
//! JSON (plus one binary tensor file) and embeds the run configuration.

pub mod args;
pub mod artifact;
mod commands;
pub mod config;
pub mod error;

pub use args::Cli;
pub use error::{CliError, Result};

pub fn run(cli: &Cli) -> Result<()> {
    commands::dispatch(cli)
}
