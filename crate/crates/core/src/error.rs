use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    /// The center of mass of an empty tuple was requested.
    #[error("center of mass of an empty cluster is undefined")]
    EmptyCluster,

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("missing audit data: {0}")]
    MissingAuditData(String),

    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Process exit code used by the command-line front end.
    ///
    /// Contract violations and bad input map to 2, filesystem and
    /// serialization failures to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
            _ => 2,
        }
    }
}
