use thiserror::Error;

/// Errors produced by path construction, partitioning and the numerical
/// operators built on top of them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Hurst index must lie in (0,1), got {0}")]
    HurstOutOfRange(f64),

    #[error("path needs at least two samples, got {0}")]
    TooFewSamples(usize),

    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),

    #[error("path values must be finite")]
    NonFiniteValue,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires a scalar (d=1) path, got d={0}")]
    ScalarPathRequired(usize),

    #[error("tensor order mismatch: expected {expected}, got {got}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("order must be even, got {0}")]
    OddOrder(usize),

    #[error("order must be odd and >= 3, got {0}")]
    EvenOrder(usize),

    #[error(
        "level {level} not resolvable on this grid: max sample increment {max_increment:e} >= 2^-{level}"
    )]
    ResolutionGuard { level: u32, max_increment: f64 },

    #[error("partition must contain at least {{0, T}}")]
    EmptyPartition,

    #[error("circulant embedding is not positive semi-definite (min eigenvalue {0:e}) and the path is too long for the dense fallback")]
    EmbeddingFailed(f64),

    #[error("unknown analytic path kind `{0}`")]
    UnknownPathKind(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported function for this operation: {0}")]
    UnsupportedFunction(String),

    #[error("missing derivative of order {0}")]
    MissingDerivative(usize),

    #[error("variation profile has {0} level(s); at least 2 are required")]
    NotEnoughLevels(usize),

    #[error("spatial grid does not resolve the dyadic cells at level {level}: {reason}")]
    UnderResolvedGrid { level: u32, reason: String },

    #[error("q-variation exponent must be >= 1, got {0}")]
    QOutOfRange(f64),

    #[error("profile does not match path: {0}")]
    ProfileMismatch(String),

    #[error("csv format error: {0}")]
    CsvFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the CLI to map errors to exit codes:
/// bad inputs exit 2, numerical failures exit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ResolutionGuard { .. } | Error::EmbeddingFailed(_) => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
