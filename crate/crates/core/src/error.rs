use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("code construction failed after {attempts} attempts; predicate that kept failing: {predicate}")]
    Construction { attempts: usize, predicate: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
