use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension overflow: {0}x{1} exceeds 8")]
    DimensionOverflow(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit index {0} out of range (expected 1, 2 or 3)")]
    QubitIndex(u8),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("imaginary residue {0:e} in expectation value")]
    ImaginaryResidue(f64),

    /// A state failed validation; `invariant` names the violated property
    /// (`norm`, `trace`, `hermitian`, `positivity`, `length`, `finite`).
    #[error("invalid state: {invariant} violated ({detail})")]
    InvalidState {
        invariant: &'static str,
        detail: String,
    },

    #[error("invalid measurement vector: {0}")]
    InvalidVector(String),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown class label `{0}`")]
    UnknownClass(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}
