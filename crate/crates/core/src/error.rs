use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite: {value}")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spectral parameter must lie in the upper half plane, got im = {im}")]
    OffHalfPlane { im: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration with {particles} particles exceeds the enumeration cap of {cap}")]
    EnumerationCap { particles: usize, cap: usize },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("missing value for configuration {0}")]
    MissingValue(String),

    #[error("eigenvalues {lower} and {upper} collided at time {time}")]
    EigenvalueCollision { time: f64, lower: usize, upper: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
