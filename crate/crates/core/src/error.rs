use thiserror::Error;

/// Errors raised by the analytical and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration is incomplete or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested combination of receiver strategies has no model.
    #[error("unsupported strategy: {0}")]
    Unsupported(String),

    /// Every stability probe was inconclusive; `lo..hi` is the last bracket.
    #[error("all stability verdicts inconclusive; boundary lies in [{lo}, {hi}]")]
    Inconclusive { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
