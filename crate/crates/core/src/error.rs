use thiserror::Error;

/// Errors produced by the graph, extreme-value and probability routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("probability {0} is outside the admissible range {1}")]
    InvalidProbability(f64, &'static str),
    #[error("vertex {vertex} is out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex set must be nonempty")]
    EmptyVertexSet,
    #[error("vertex set must be strictly increasing")]
    UnsortedVertexSet,
    #[error("subset size k={k} must satisfy 1 <= k < n={n}")]
    InvalidSubsetSize { k: usize, n: usize },
    #[error("order-statistic count m must be at least 1")]
    InvalidOrderCount,
    #[error("enumeration of {count} subsets exceeds the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed edge list at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
