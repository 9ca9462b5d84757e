use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("selection failure: {0}")]
    Selection(String),

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("ingest error in {path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error("schema mismatch: expected version {expected}, found {found}")]
    Schema { expected: u32, found: u32 },

    #[error("jpeg codec: {0}")]
    Jpeg(String),

    #[error("clip {clip}, frame {frame}: {source}")]
    Frame {
        clip: String,
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    /// Short machine-readable kind tag, used by the CLI and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Selection(_) => "selection-failure",
            Error::Format { .. } => "format",
            Error::Ingest { .. } => "ingest",
            Error::Schema { .. } => "schema-mismatch",
            Error::Jpeg(_) => "jpeg",
            Error::Frame { source, .. } => source.kind(),
            Error::Io { .. } => "io",
            Error::Serde(_) => "serialization",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub(crate) fn invalid_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
