use thiserror::Error;

/// Errors produced by the re-ranking toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("feature count {features} \u{2260} distance order {distances}")]
    OrderMismatch { features: usize, distances: usize },

    #[error("matrix order mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric is degenerate (all entries equal) before round {round}")]
    DegenerateMetric { round: usize },

    #[error("no probe has a valid gallery match")]
    NoValidQueries,

    #[error("{0} population is empty")]
    EmptyPopulation(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
