use thiserror::Error;

/// Errors raised by the simulator, the image codecs and the analytics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("gate needs two distinct qubits, got {0} twice")]
    SameQubit(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("post-selection impossible: branch probability {probability:e}")]
    PostSelectionImpossible { probability: f64 },

    #[error("image has no points; the probe photon is always absorbed")]
    NoPoints,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("image dimension {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("PBM/PGM parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
