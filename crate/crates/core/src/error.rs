use thiserror::Error;

/// Errors raised by the algebra, simulation and compilation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrcError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity exceeded: {what} needs dimension {requested}, limit is {limit}")]
    Capacity {
        what: String,
        requested: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid code: {0}")]
    Validation(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unknown builtin code `{0}`")]
    UnknownCode(String),

    #[error("invalid circuit: {0}")]
    Circuit(String),

    #[error("compilation error: {0}")]
    Compile(String),

    #[error("non-physical output: {0}")]
    NonPhysical(String),
}

pub type Result<T> = std::result::Result<T, LrcError>;

pub fn dim_err(msg: impl Into<String>) -> LrcError {
    LrcError::Dimension(msg.into())
}
