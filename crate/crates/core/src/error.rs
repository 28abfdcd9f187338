use thiserror::Error;

/// Errors raised by the numerical kernels and law constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the support: {0}")]
    Domain(String),

    #[error("precondition violated for exponent {exponent}: {reason}")]
    Precondition { exponent: f64, reason: String },

    #[error("series did not converge within {terms} terms ({what})")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("series overflowed f64 range ({0})")]
    Overflow(&'static str),

    #[error("quadrature did not reach tolerance: estimated error {estimate:e}")]
    Quadrature { estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
