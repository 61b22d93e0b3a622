use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("cluster-head election produced no heads after {attempts} draws")]
    ElectionFailure { attempts: usize },

    #[error("{count} cluster head(s) cannot reach the base station: {ids:?}")]
    Unreachable { count: usize, ids: Vec<usize> },

    #[error("no hop statistics: every cluster head is unreachable")]
    NoStatistics,

    #[error("normalized error undefined for an all-zero reference signal")]
    UndefinedMetric,

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invalid_data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
