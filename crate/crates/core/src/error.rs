use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An exhaustive search would exceed its configured resource cap.
    #[error("cap {what} exceeded: requested {requested}, limit {limit}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate vector on line {line} (first seen on line {first_line})")]
    DuplicateVector { first_line: usize, line: usize },

    #[error("query {0} has no plan in this data structure")]
    UnknownQuery(String),

    #[error("per-matrix advantage {0} is negative; apply the sign-bit normalization (majority_flip) first")]
    NegativeAdvantage(String),

    /// A guarantee that must hold by construction did not.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn cap(what: &'static str, requested: u128, limit: u128) -> Self {
        Error::CapExceeded { what, requested, limit }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
