use thiserror::Error;

/// Hard failures: bad inputs, violated preconditions, exhausted budgets.
/// Semantic outcomes (a construction that legitimately fails, a truncated
/// enumeration) are modeled as enum results in their own modules, not here.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematically undefined request, e.g. a codegree family that does
    /// not exist for the given parameters.
    #[error("domain: {0}")]
    Domain(String),

    /// A parameter outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A work budget was exceeded before the answer was determined.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),

    /// An internal invariant failed; always a bug.
    #[error("internal: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
