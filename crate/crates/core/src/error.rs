use thiserror::Error;

/// Errors raised by the operator calculus and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capability: {0}")]
    Capability(String),
    #[error("singular evaluation: {0}")]
    Singularity(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("resource budget exceeded: {required:.3e} operations > budget {budget:.3e}")]
    Budget { required: f64, budget: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("regime: {0}")]
    Regime(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("near-singular system: min/max singular value estimate {ratio:.3e}")]
    NearKernel { ratio: f64 },
    #[error("format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
