use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("config line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },
    #[error("numerical abort: {0}")]
    NonFinite(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    File { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] blinddeconv_core::Error),
}

impl AppError {
    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn file(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        AppError::File {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// 1 config, 2 numerical abort, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::ConfigLine { .. } => 1,
            AppError::NonFinite(_) => 2,
            AppError::Io { .. } | AppError::File { .. } => 3,
            AppError::Core(e) => match e {
                blinddeconv_core::Error::NonFinite(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
