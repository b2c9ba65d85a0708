use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry buffer has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("norm order p = 0 is undefined")]
    ZeroNormOrder,

    #[error("invalid Renyi order: {0}")]
    InvalidAlpha(String),

    #[error("not a probability vector: {0}")]
    NotSimplex(String),

    #[error("invalid subsystem specification: {0}")]
    InvalidSubsystems(String),

    #[error("rank {rank} exceeds dimension {dim}")]
    RankExceedsDim { rank: usize, dim: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("objective evaluated to NaN in every restart")]
    ObjectiveNan,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare(..) => "not_square",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite => "non_finite",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotPsd(_) => "not_psd",
            Error::InvalidTrace(_) => "invalid_trace",
            Error::NotNormalized(_) => "not_normalized",
            Error::ZeroNormOrder => "zero_norm_order",
            Error::InvalidAlpha(_) => "invalid_alpha",
            Error::NotSimplex(_) => "not_simplex",
            Error::InvalidSubsystems(_) => "invalid_subsystems",
            Error::RankExceedsDim { .. } => "rank_exceeds_dim",
            Error::InvalidChannel(_) => "invalid_channel",
            Error::InvalidConfig(_) => "invalid_config",
            Error::ObjectiveNan => "objective_nan",
            Error::Parse(_) => "parse",
        }
    }
}
