use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input file; `location` names the line/column or field.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    /// Trial-and-error AP placement did not reach an association fixed point.
    #[error("association cycling: no fixed point after {rounds} rounds")]
    AssociationCycling { rounds: usize },

    /// HAP placement did not reach a consistent set of association assumptions.
    #[error("assumption cycling: no consistent assumptions after {rounds} rounds")]
    AssumptionCycling { rounds: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for the two non-termination guards.
    pub fn is_cycling(&self) -> bool {
        matches!(
            self,
            Error::AssociationCycling { .. } | Error::AssumptionCycling { .. }
        )
    }
}
