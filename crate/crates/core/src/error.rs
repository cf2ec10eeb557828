use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants are coarse on purpose: the CLI maps them onto exit codes
/// (`Validation`/`Domain`/`Parse` -> 2, `Precondition` -> 3, `Resource` -> 4).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A theorem's hypothesis does not hold, so the bound is not proven there.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A record or object failed its structural invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// The request would exceed a configured size or retry budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The input is well formed but the requested structure is not handled.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
