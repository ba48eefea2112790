//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value is outside the domain an operation accepts (non-finite input,
    /// slice out of range, magnitude too wide, ...).
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// A configuration parameter violates its documented constraints.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A block or combined exponent does not fit the configured exponent field.
    #[error("exponent overflow: {0}")]
    ExponentOverflow(String),

    /// Operand or result streams that must be aligned have different lengths.
    #[error("stream alignment error: {0}")]
    AlignmentError(String),

    /// A tile job does not fit the DAC buffer capacity.
    #[error("capacity exceeded: {0}")]
    CapacityError(String),

    /// Matrix shapes are not conformable for the requested operation.
    #[error("shape mismatch: {0}")]
    ShapeError(String),

    /// The reference matrix has zero norm, so a relative error is undefined.
    #[error("degenerate reference: reference matrix has zero norm")]
    DegenerateReference,

    /// A regression fit could not be performed on the given points.
    #[error("fit error: {0}")]
    FitError(String),

    /// File parsing failed (config, matrix, or table file).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 2 for usage/shape/config problems,
    /// 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ShapeError(_) | Error::InvalidConfig(_) | Error::Parse(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
