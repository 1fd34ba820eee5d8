use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("degenerate chart: smallest singular value {0:e} below rank cutoff")]
    DegenerateChart(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("rejection envelope too loose: acceptance rate {rate:e} over {trials} proposals")]
    EnvelopeTooLoose { rate: f64, trials: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient samples: {got} < {min}")]
    InsufficientSamples { got: usize, min: usize },
    #[error("complex built to dimension {built} cannot give Betti numbers up to {requested}")]
    InsufficientComplex { built: usize, requested: usize },
    #[error("simplex cap exceeded: more than {cap} simplices")]
    ResourceCap { cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

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

pub type Result<T> = std::result::Result<T, Error>;
