use thiserror::Error;

/// Errors produced by the geometric primitives, the descent engine and the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument broke an operation's contract (e.g. a tangent vector
    /// attached to the wrong base point).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// `log(x, y)` requested with `d(x, y)` at or beyond the injectivity radius.
    #[error("point lies on or beyond the cut locus (distance {distance} >= radius {radius})")]
    CutLocus { distance: f64, radius: f64 },

    /// Two bundle elements do not live in the same fiber.
    #[error("bundle elements live over different base points")]
    FiberMismatch,

    /// A documented precondition (sample counts, interval membership, ...) failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An objective produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Discrete maps with incompatible grids or targets.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
