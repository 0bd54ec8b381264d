use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative method produced a non-finite objective. Usually a stepsize problem.
    #[error("divergence at iteration {iteration}: {message}")]
    Divergence { iteration: usize, message: String },

    /// A bracketing or iteration budget was exhausted without meeting the tolerance.
    #[error("no convergence after {iterations} iterations: {message}")]
    NoConvergence { iterations: usize, message: String },

    /// An internal invariant was violated. Indicates a bug or severe round-off.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
