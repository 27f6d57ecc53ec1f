use thiserror::Error;

/// Errors produced by the laboratory's operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Validation(String),

    /// The requested work exceeds the configured operation budget.
    #[error("operation budget exceeded: estimated cost {estimated} > budget {budget}")]
    Budget { estimated: u128, budget: u128 },

    /// Integer width exhausted; never silently wrapped.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// A numerical routine failed to reach its target accuracy.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed cache file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
