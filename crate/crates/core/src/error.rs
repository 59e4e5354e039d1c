use thiserror::Error;

/// Errors raised by the separability toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SepError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("operator is not Hermitian (max |M - M^dagger| = {max_dev:e})")]
    NotHermitian { max_dev: f64 },

    #[error("matrix is not unitary (max |U^dagger U - I| = {max_dev:e})")]
    NotUnitary { max_dev: f64 },

    #[error("operator is not separable")]
    NotSeparable,

    #[error("simultaneous diagonalization failed (residual {residual:e} > {threshold:e})")]
    DiagonalizationFailed { residual: f64, threshold: f64 },

    #[error("inconsistent spectral clustering: {0}")]
    ClusterError(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate pointer sector: S-projector {index} has rank {rank}")]
    DegeneratePointerSector { index: usize, rank: usize },

    #[error("invalid composite spec: {0}")]
    SpecError(String),

    #[error("{count} bipartitions exceed the budget of {max}")]
    BudgetExceeded { count: usize, max: usize },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl SepError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            SepError::InvalidDimensions(_) => "InvalidDimensions",
            SepError::InvalidPermutation(_) => "InvalidPermutation",
            SepError::NotHermitian { .. } => "NotHermitian",
            SepError::NotUnitary { .. } => "NotUnitary",
            SepError::NotSeparable => "NotSeparable",
            SepError::DiagonalizationFailed { .. } => "DiagonalizationFailed",
            SepError::ClusterError(_) => "ClusterError",
            SepError::InvalidState(_) => "InvalidState",
            SepError::DegeneratePointerSector { .. } => "DegeneratePointerSector",
            SepError::SpecError(_) => "SpecError",
            SepError::BudgetExceeded { .. } => "BudgetExceeded",
            SepError::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, SepError>;
