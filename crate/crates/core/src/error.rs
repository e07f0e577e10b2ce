use thiserror::Error;

/// Errors raised by the library.
///
/// Numerical blow-up of a simulated path is not an error: it is recorded on
/// the path and aggregated by the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("scheme `{scheme}` is not applicable: {reason}")]
    IncompatibleScheme { scheme: &'static str, reason: String },

    #[error("implicit solve failed after {iterations} iterations: {reason}")]
    SolverFailure { iterations: usize, reason: String },

    #[error("negative argument {value} passed to a square root without an extension")]
    NegativeSqrtArgument { value: f64 },

    #[error("oracle self-check failed: {0}")]
    OracleCheck(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
