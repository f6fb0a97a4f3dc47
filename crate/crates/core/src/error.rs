use crate::expr::{DomainError, ExprError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("singular metric at {point:?}: {reason}")]
    SingularMetric { point: Vec<f64>, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A mathematical precondition (e.g. umbilicity) does not hold.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<DomainError> for Error {
    fn from(e: DomainError) -> Self {
        Error::Expr(ExprError::Domain(e))
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for failures caused by the numbers rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::SingularMetric { .. } | Error::Expr(ExprError::Domain(_))
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
