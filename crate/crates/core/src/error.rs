use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("capacity error: {qubits} qubits exceeds the maximum of {max}")]
    Capacity { qubits: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Post-selection onto a sector that carries no weight.
    #[error("rejection error: {0}")]
    Rejection(String),

    /// Overlap matrix of a subspace expansion is singular.
    #[error("degenerate overlap: {0}")]
    DegenerateOverlap(String),

    #[error("optimizer error: {0}")]
    Optimizer(String),

    #[error("load error: {0}")]
    Load(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
