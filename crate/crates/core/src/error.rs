use alloc::string::String;
use core::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Inputs with inconsistent shapes or out-of-range configuration values.
    InvalidArgument(String),
    /// Mathematical preconditions violated (KL support, non-positive scale).
    Domain(String),
    /// A computation produced or detected a non-finite value.
    Numeric(String),
    /// Ratio denominator `pi(a|s)` is zero at a point where the ratio matters.
    DivisionByZero { state: usize, action: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            CoreError::Domain(msg) => write!(f, "domain error: {msg}"),
            CoreError::Numeric(msg) => write!(f, "numeric error: {msg}"),
            CoreError::DivisionByZero { state, action } => write!(
                f,
                "division by zero: pi(a|s) = 0 at state {state}, action {action}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CoreError {
    CoreError::InvalidArgument(msg.into())
}
