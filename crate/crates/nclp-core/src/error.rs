use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An iterative routine did not converge.
    #[error("numeric failure in {routine} after {iterations} iterations")]
    Convergence { routine: &'static str, iterations: usize },
    /// A kernel or intermediate value was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),
    /// Requested branch is not implemented.
    #[error("out of scope: {0}")]
    OutOfScope(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for the numeric failure classes (non-convergence, non-finite).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
