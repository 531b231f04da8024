use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data or arguments violate a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A model fit did not converge (IRLS, Newton-Raphson, or the EL dual).
    #[error("{method} did not converge after {iterations} iterations: {detail}")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        detail: String,
    },

    /// The design matrix is rank deficient (or a Newton system is singular).
    #[error("singular system in {0}: design matrix is rank deficient")]
    Singular(&'static str),

    /// A dataset cannot support the requested two-group operation.
    #[error("degenerate dataset: {0}")]
    Degenerate(String),

    /// A quantity required to be positive vanished (e.g. RMST of a curve
    /// that starts at zero, or a zero denominator AH).
    #[error("domain error: {0}")]
    Domain(String),

    /// Too many bootstrap replicates or study iterations failed.
    #[error("too many failed replicates: {failed} of {total} ({detail})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
