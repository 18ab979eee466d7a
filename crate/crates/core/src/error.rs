use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported moment: {0}")]
    UnsupportedMoment(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("budget exceeded in {what}: needs {needed}, cap {cap}")]
    BudgetExceeded { what: String, needed: u128, cap: u128 },
    #[error("size limit: {0}")]
    SizeLimit(String),
    #[error("distribution without finite support: {0}")]
    NonFiniteSupport(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("Kim-Vu condition violated: {0}")]
    KimVuConditionViolated(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn budget(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::BudgetExceeded { what: what.into(), needed, cap }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::SizeLimit(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
