use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no matches processed")]
    NoMatches,

    #[error("unknown dilemma id `{0}`")]
    UnknownDilemma(String),

    #[error("value `{0}` is not part of the value system")]
    UnknownValue(String),

    #[error("not enough common values: {found} shared, at least 2 required")]
    TooFewCommon { found: usize },

    #[error("zero variance in {side} over the common values")]
    ZeroVariance { side: &'static str },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: schema version {found} is not supported (expected {expected}); re-export the file with this version of valuescope")]
    SchemaVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

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
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
