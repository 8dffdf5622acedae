use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("spec error: {0}")]
    Spec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end: 1 for bad input,
    /// 2 for I/O, 3 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Validation(_)
            | Error::Format(_)
            | Error::Geometry(_)
            | Error::EmptyRegion(_)
            | Error::Spec(_)
            | Error::Config(_)
            | Error::Json(_) => 1,
            Error::Csv(e) if e.is_io_error() => 2,
            Error::Csv(_) => 1,
            Error::Io { .. } | Error::Image { .. } => 2,
            Error::Internal(_) => 3,
        }
    }
}
