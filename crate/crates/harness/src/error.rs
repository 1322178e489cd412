use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] hd_core::Error),
    #[error("shape error in {0}")]
    Shape(String),
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("invalid config field `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
