use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of the requested formula or constructor.
    #[error("domain error: {0}")]
    Domain(String),

    /// A box, settings distribution or model violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Certification was requested in a regime where the bound is void.
    #[error("certification impossible: {0}")]
    Certification(String),

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

macro_rules! domain_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(format!($($arg)*))
    };
}

macro_rules! validation_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Validation(format!($($arg)*))
    };
}

pub(crate) use domain_err;
pub(crate) use validation_err;
