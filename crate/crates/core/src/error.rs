use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("empty input")]
    EmptyInput,

    #[error("input length {got} is below the minimum {min}")]
    TooShort { min: usize, got: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional array")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("extension plan does not match the field: {0}")]
    PlanMismatch(String),

    #[error("boundary conditions not supported here: {0}")]
    BoundaryMismatch(String),

    /// The discrete symbol vanishes at the listed multi-index: k^2 h^2 sits on a
    /// discrete eigenvalue of the extended operator.
    #[error("resonance: symbol {value:.3e} at mode {modes:?} (threshold {threshold:.3e})")]
    Resonance {
        modes: Vec<usize>,
        value: f64,
        threshold: f64,
    },

    #[error("dense assembly of {size} unknowns exceeds the cap of {cap}")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("singular dense system")]
    SingularDense,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
