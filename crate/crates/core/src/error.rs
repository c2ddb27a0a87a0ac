use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode {0}; expected 1, 2 or 3")]
    InvalidMode(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nnls did not converge within {0} iterations")]
    MaxIterationsExceeded(usize),

    #[error("gram matrix is numerically singular on a passive set")]
    NumericallySingular,

    #[error("tensor is identically zero")]
    DegenerateTensor,

    #[error("could not place {k} clusters: only {distinct} distinct points")]
    EmptyClusterUnrecoverable { k: usize, distinct: usize },

    #[error("at least two non-empty clusters are required")]
    SingleCluster,

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("column {0} is constant")]
    ConstantColumn(usize),

    #[error("sample has zero variance and no bandwidth was given")]
    ZeroVariance,

    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate record for player {player_id} match {match_index}")]
    DuplicateKey { player_id: String, match_index: u32 },

    #[error("no players retained after filtering")]
    NoPlayersRetained,

    #[error("{path}: not a valid tensor file: {reason}")]
    InvalidTensorFile { path: PathBuf, reason: String },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
