use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid bipolar element {0} (must be -1 or +1)")]
    NotBipolar(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("qubit budget exceeded: {requested} qubits requested, cap is {cap}")]
    QubitBudget { requested: usize, cap: usize },

    #[error("register span is not in the |0...0> baseline state")]
    SpanNotBaseline,

    #[error("reflection axis is not normalized (norm^2 = {0})")]
    NonUnitAxis(f64),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("unphysical noise parameters: {0}")]
    Unphysical(String),

    #[error("density-matrix reference limited to {cap} qubits, got {requested}")]
    DensityCap { requested: usize, cap: usize },

    #[error("codebook file: {0}")]
    Format(String),

    #[error("no measurement matched a codebook row")]
    NoMatchedMeasurement,

    #[error("unique instance not found after {0} attempts")]
    InstanceNotFound(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
