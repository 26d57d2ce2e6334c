use thiserror::Error;

/// Errors raised by the simulation, geometry and numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Quadrature stopped without meeting its tolerance. `estimate` and
    /// `error_bound` are the best values reached before giving up.
    #[error("numeric failure: {detail} (estimate {estimate:e}, error bound {error_bound:e})")]
    NumericFailure {
        estimate: f64,
        error_bound: f64,
        detail: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
