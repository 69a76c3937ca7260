use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GatewayError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("template `{template}` has no binding for placeholder `{{{placeholder}}}`")]
    MissingBinding { template: &'static str, placeholder: String },

    #[error("unknown template id `{0}`")]
    UnknownTemplate(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("replay cache miss for key {key}")]
    CacheMiss { key: String },

    #[error("no backend configured for live requests")]
    NoBackend,

    #[error("HTTP {status} from {url}: {body}")]
    Http { status: u16, url: String, body: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("malformed {what} after retry: {text:?}")]
    Malformed { what: &'static str, text: String },

    #[error("judge answer `{answer}` is not a member of the value system")]
    OutsideSystem { answer: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] valuescope_core::Error),
}

impl GatewayError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GatewayError::Io {
            path: path.into(),
            source,
        }
    }
}
