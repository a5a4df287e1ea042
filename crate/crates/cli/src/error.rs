use std::path::PathBuf;

use thiserror::Error;

/// Failures of the batch front end, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed JSON in {source_name}: {message}")]
    MalformedJson {
        source_name: String,
        message: String,
    },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("analysis failed: {0}")]
    Analysis(#[from] qgid::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::InvalidRequest(_) => 64,
            Self::MalformedJson { .. } => 65,
            Self::UnknownFamily(_) => 66,
            Self::OutOfRange(_) => 67,
            Self::Analysis(_) => 70,
            Self::Io { .. } | Self::Csv { .. } => 74,
        }
    }

    /// Classifies a validation error raised while building the request.
    pub(crate) fn from_validation(err: qgid::Error) -> Self {
        match err {
            qgid::Error::UnknownFamily(name) => Self::UnknownFamily(name),
            other => Self::OutOfRange(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
