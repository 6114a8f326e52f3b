use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("space mismatch: operator acts on {expected}, state lives in {found}")]
    SpaceMismatch { expected: String, found: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace {0} differs from 1")]
    BadTrace(f64),

    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("operator is not unitary or isometric (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("factor index {index} out of range for a {count}-factor space")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("expected a two-factor tensor space, got {0} factor(s)")]
    NotBipartite(usize),

    #[error("phase shifters act on path modes, got output port {0}")]
    PortNotPath(String),

    #[error("visibility {0} outside [0, 1]")]
    InvalidVisibility(f64),

    #[error("invalid joint distribution: {0}")]
    InvalidDistribution(String),

    #[error("grid must not be empty")]
    EmptyGrid,

    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },

    #[error("sample count must be at least {min}, got {got}")]
    SampleCount { min: usize, got: usize },
}
