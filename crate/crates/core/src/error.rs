use thiserror::Error;

/// Errors raised anywhere in the QGAN pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("gate acts on qubit {0} as both control and target")]
    RepeatedQubit(usize),
    #[error("non-finite angle {0}")]
    NonFiniteAngle(f64),
    #[error("register of {0} qubits is outside the supported range 1..={max}", max = crate::sim::MAX_QUBITS)]
    UnsupportedRegister(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("statevector norm² is {0}, expected 1")]
    NotNormalized(f64),
    #[error("qubit count {0} outside the supported range 1..=8")]
    QubitCountOutOfRange(usize),
    #[error("parameter vector has length {actual}, framework needs {expected}")]
    ParameterCount { expected: usize, actual: usize },
    #[error("invalid framework: {0}")]
    InvalidFramework(String),
    #[error("parameter index {index} out of range for {len} parameters")]
    ParameterOutOfRange { index: usize, len: usize },
    #[error("parameter {0} does not drive exactly one rotation gate, shift rule does not apply")]
    NonShiftable(usize),
    #[error("finite-difference step {0} outside (0, 1e-2]")]
    InvalidStep(f64),
    #[error("non-finite gradient entry at index {0}")]
    NonFiniteGradient(usize),
    #[error("invalid optimizer hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("invalid training ratio: {0}")]
    InvalidRatio(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("cannot fit: {0}")]
    Fit(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
