use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The smallest Schmidt coefficient is too small for the requested operation.
    #[error("zero Schmidt coefficient: smallest coefficient {smallest:e} is below {threshold:e}")]
    ZeroCoefficient { smallest: f64, threshold: f64 },

    #[error("rank deficient: Schmidt rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    /// The operation maps the state to (numerically) zero, so no output state exists.
    #[error("state annihilated: outcome probability {probability:e}")]
    Annihilated { probability: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Domain errors are failures of a well-formed request (as opposed to malformed input).
    pub fn is_domain_error(&self) -> bool {
        matches!(self, Error::ZeroCoefficient { .. } | Error::RankDeficient { .. } | Error::Annihilated { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
