use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Model(String),
    #[error(transparent)]
    Core(#[from] driftboost_core::Error),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl std::fmt::Display, message: impl Into<String>) -> Self {
        Error::Parse { path: path.to_string(), message: message.into() }
    }

    /// 2 usage, 3 data, 4 internal invariant failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Core(driftboost_core::Error::InvalidParam(_)) => 2,
            Error::Internal(_) => 4,
            _ => 3,
        }
    }
}
