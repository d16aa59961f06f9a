use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature order {requested} unavailable (supported 1..={max})")]
    QuadratureOrder { requested: usize, max: usize },

    #[error("truncation for gamma = {gamma} exceeds cap of {cap} modes")]
    TruncationCap { gamma: f64, cap: usize },

    #[error("degenerate mode space: in-space probability {0:e} below threshold")]
    DegenerateSpace(f64),

    #[error("probabilities are not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("shape mismatch: expected {expected} outcomes, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("calibration maps every entry to zero")]
    CalibrationCollapse,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
