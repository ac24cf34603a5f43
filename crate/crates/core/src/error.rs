use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("minimum distance {min_distance} m leaves no room in a cell of half-diagonal {half_diagonal} m")]
    EmptyDropRegion {
        min_distance: f64,
        half_diagonal: f64,
    },

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("antenna correlation factor {0} is outside [0, 1]")]
    CorrelationOutOfRange(f64),

    #[error("covariance {index} is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e} is below {tolerance:e}")]
    NotPsd {
        index: usize,
        min_eigenvalue: f64,
        tolerance: f64,
    },

    #[error("covariance {index} is not Hermitian (defect {defect:e})")]
    NotHermitian { index: usize, defect: f64 },

    #[error("singular Gram matrix (condition number {condition:e})")]
    SingularGram { condition: f64 },

    #[error("sample probabilities undefined for an all-zero channel with zero regularization")]
    DegenerateProbabilities,

    #[error("row {0} has zero norm but nonzero selection probability")]
    ZeroRowWithProbability(usize),

    #[error("combining vector {0} is zero")]
    ZeroCombiningColumn(usize),

    #[error("estimated channel contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("SINR denominator for UE {ue} is negative ({value:e})")]
    NegativeDenominator { ue: usize, value: f64 },

    #[error("covariance of UE {0} has zero trace")]
    ZeroTrace(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
