use thiserror::Error;

/// Errors raised by the evaluators and checkers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Index or parameter outside the admitted working range.
    #[error("range error: {0}")]
    Range(String),
    /// Malformed request (unknown identifier, degenerate grid, violated precondition).
    #[error("usage error: {0}")]
    Usage(String),
    /// A numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A supremum is unbounded on the searched interval.
    #[error("supremum diverges: objective still increasing at search cap t = {cap:e}")]
    Divergence { cap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
