use thiserror::Error;

/// Errors raised by the numerical kernel and the simulation pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (‖A − A†‖_max = {norm:.3e})")]
    NotHermitian { norm: f64 },

    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("density matrix is invalid: {0}")]
    InvalidState(String),

    #[error("degenerate state: normalization denominator {denominator:.3e} at t = {t}")]
    DegenerateState { t: f64, denominator: f64 },

    #[error("step rejected at t = {t}: drift {drift:.3e} exceeds {limit:.1e}; reduce dt")]
    StepRejected { t: f64, drift: f64, limit: f64 },

    #[error("dilation constraint violated at t = {t}: min eigenvalue {eigenvalue} < 1")]
    ConstraintViolation { t: f64, eigenvalue: f64 },

    #[error("eta is near-singular at t = {t} (min eigenvalue of M − I = {gap:.3e}); use m0 > 1")]
    NearSingularEta { t: f64, gap: f64 },

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    #[error("index {index} out of range (largest valid index {max})")]
    Range { index: usize, max: usize },

    #[error("empty branch: ancilla component norm {norm:.3e}")]
    EmptyBranch { norm: f64 },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
