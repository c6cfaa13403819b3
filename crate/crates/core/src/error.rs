use std::path::PathBuf;

use thiserror::Error;

use crate::quiz::client::ClientError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input: {0}")]
    Empty(String),

    /// Malformed structured text, with a location or field context.
    #[error("parse error ({context}): {message}")]
    Parse { context: String, message: String },

    #[error("image too small for pyramid level {level}: {width}x{height} cannot be halved further")]
    ImageTooSmall { level: usize, width: usize, height: usize },

    #[error("corrupt package: {0}")]
    CorruptPackage(String),

    #[error("unsupported format {found:?}; supported: {supported}")]
    UnsupportedFormat { found: String, supported: String },

    #[error("cannot decode image {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Client(#[from] ClientError),
}

impl Error {
    pub fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure is caused by the caller's input rather than by
    /// a defect in the engine. The CLI maps this onto its exit code.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Client(ClientError::Transport(_)))
    }
}
