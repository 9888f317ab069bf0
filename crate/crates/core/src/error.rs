use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid label {label} for the {family} family")]
    InvalidLabel { family: &'static str, label: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("integrand has unbounded support and the quadrature plan does not admit it")]
    UnboundedSupport,

    #[error("adaptive quadrature did not converge within {max_subdivisions} subdivisions")]
    QuadratureNotConverged { max_subdivisions: usize },

    #[error("frequency range misses part of the support (missed mass bound {missed_mass:e})")]
    KRangeTooSmall { missed_mass: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("coordinates outside the admissible slice: {0}")]
    OutsideSlice(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
