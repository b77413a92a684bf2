use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("element is not invertible: entry {index} has modulus {modulus:e}")]
    NotInvertible { index: usize, modulus: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("operator norm {norm:e} is within tolerance of zero")]
    ZeroOperator { norm: f64 },

    #[error("rank decision is ambiguous: {reason}")]
    RankAmbiguous { reason: String },

    #[error("map is not a derivation (defect {defect:e})")]
    NotADerivation { defect: f64 },

    #[error("unit pair invalid: |f0(x0) - e| = {residual:e}")]
    UnitPairInvalid { residual: f64 },

    #[error("map is not A-linear (defect {defect:e})")]
    NotALinear { defect: f64 },

    #[error("point map lacks required probe: {0}")]
    MissingProbe(String),

    #[error("search budget of {budget} trials exhausted")]
    SearchBudgetExceeded { budget: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable short name used in reports to classify failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotInvertible { .. } => "NotInvertible",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidAlgebra(_) => "InvalidAlgebra",
            Error::ZeroOperator { .. } => "ZeroOperator",
            Error::RankAmbiguous { .. } => "RankAmbiguous",
            Error::NotADerivation { .. } => "NotADerivation",
            Error::UnitPairInvalid { .. } => "UnitPairInvalid",
            Error::NotALinear { .. } => "NotALinear",
            Error::MissingProbe(_) => "MissingProbe",
            Error::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            Error::Parse(_) => "Parse",
        }
    }

    pub(crate) fn mismatch(expected: impl std::fmt::Debug, found: impl std::fmt::Debug) -> Self {
        Error::DimensionMismatch {
            expected: format!("{expected:?}"),
            found: format!("{found:?}"),
        }
    }
}
