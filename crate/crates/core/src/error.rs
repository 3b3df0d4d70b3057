use std::path::PathBuf;

use thiserror::Error;

use crate::solver::IterationTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("receiver index {index} out of range (r_num = {count})")]
    ReceiverOutOfRange { index: usize, count: usize },

    #[error("fast DFT requires a power-of-two length, got {0}")]
    NotPowerOfTwo(usize),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// `‖F sₖ‖` vanished for a nonzero steepest-descent direction.
    #[error("singular steepest-descent step at k = {k}: ‖F s‖² = {denominator:e}")]
    SingularStep { k: usize, denominator: f64 },

    #[error("numerical failure at k = {k}: non-finite iterate")]
    NumericalFailure { k: usize, trace: Box<IterationTrace> },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::NumericalFailure { .. } | Error::SingularStep { .. } => 3,
            _ => 2,
        }
    }
}
