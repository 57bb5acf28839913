use thiserror::Error;

pub type Result<T> = std::result::Result<T, QslError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("state is not normalized (deviation {deviation:.3e})")]
    NotNormalized { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not traceless (trace {trace:.3e})")]
    NotTraceless { trace: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("at least {min} steps required, got {found}")]
    StepCountTooSmall { min: usize, found: usize },
    #[error("at least {min} samples required, got {found}")]
    TooFewSamples { min: usize, found: usize },
    #[error("grids differ: {0}")]
    GridMismatch(String),
    #[error("parameter {value} is outside the usable range")]
    ParameterOutOfRange { value: f64 },
    #[error("sample index {index} is not interior to 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("negative mean energy {energy:.3e}; protocol is not ground shifted")]
    NegativeEnergy { energy: f64 },
    #[error("check `{0}` requires a pure-state run")]
    PureCheckOnMixedRun(String),
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
}
