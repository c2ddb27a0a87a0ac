use std::process::ExitCode;

use clap::Parser;
use ntf_cli::{Cli, CliError};
use tracing_subscriber::EnvFilter;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level)),
        )
        .init();

    match ntf_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Stages(failed) = &e {
                for (stage, msg) in failed {
                    eprintln!("  stage {stage} failed: {msg}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
