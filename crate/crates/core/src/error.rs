use thiserror::Error;

/// Errors raised by the array, channel, and tracking routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An angle or position outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration that violates a type invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("beam index {index} out of range for {len} beams")]
    BeamIndex { index: usize, len: usize },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::BeamIndex { .. } => 2,
            Error::DimensionMismatch { .. } | Error::Contract(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
