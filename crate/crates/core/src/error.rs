use std::path::PathBuf;

use thiserror::Error;

use crate::domain::ValidationError;
use crate::engine::EngineError;
use crate::fuzzy::FuzzyError;
use crate::io::duration::DurationError;
use crate::optimizer::OptimizerError;
use crate::routing::RoutingError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Duration(#[from] DurationError),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short kebab-case tag used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(e) => e.kind(),
            Error::Fuzzy(_) => "fuzzy",
            Error::Routing(_) => "routing",
            Error::Engine(EngineError::Timeout { .. }) => "timeout",
            Error::Engine(_) => "engine",
            Error::Optimizer(_) => "optimizer",
            Error::Duration(_) => "duration",
            Error::Parse { .. } => "parse",
            Error::Csv { .. } => "csv",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit status: 2 for bad input, 3 for runtime failures.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Fuzzy(_)
            | Error::Routing(_)
            | Error::Duration(_)
            | Error::Parse { .. }
            | Error::Csv { .. }
            | Error::Optimizer(OptimizerError::InvalidSpec(_))
            | Error::Optimizer(OptimizerError::TooFewPositions { .. }) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
