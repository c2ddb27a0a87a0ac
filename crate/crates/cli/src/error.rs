use std::path::PathBuf;

use thiserror::Error;

/// Failures that end a command. Input problems exit with 2, everything else
/// with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Input {
        context: String,
        #[source]
        source: ntf_core::Error,
    },

    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{} stage(s) failed: {}", .0.len(), .0.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(", "))]
    Stages(Vec<(String, String)>),

    #[error(transparent)]
    Core(#[from] ntf_core::Error),
}

impl CliError {
    pub fn input(context: impl Into<String>, source: ntf_core::Error) -> Self {
        CliError::Input {
            context: context.into(),
            source,
        }
    }

    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
