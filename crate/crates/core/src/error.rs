use thiserror::Error;

/// Errors raised by the exact kernel.
///
/// Verification routines never use these for reporting mathematical
/// failures (violated axioms are data, collected in reports); errors mark
/// degenerate or malformed inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid permutation input: {0}")]
    BadPermutation(String),

    #[error("parity violation: {0}")]
    ParityViolation(String),

    #[error("bracket table invalid: {0}")]
    BadBracket(String),

    #[error("span not closed under bracket: {0}")]
    NotClosed(String),

    #[error("vector outside span: {0}")]
    NotInSpan(String),

    #[error("group pattern violated: {0}")]
    PatternViolation(String),

    #[error("expression not evaluable: {0}")]
    BadExpression(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
