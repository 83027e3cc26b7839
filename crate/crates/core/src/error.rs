use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("no substitution value supplied for v{0}")]
    MissingTraceValue(u32),

    #[error("polynomial is not scalar (it depends on u)")]
    NotScalar,

    #[error("matrix size N must be positive")]
    ZeroN,

    #[error("grade {grade} exceeds the configured block cap {cap}")]
    GradeTooLarge { grade: u32, cap: u32 },

    #[error("operator {operator} sent grade {grade} into grade {escaped}")]
    GradeEscape {
        operator: String,
        grade: u32,
        escaped: u32,
    },

    #[error("D-tilde is not nilpotent on grade {0}")]
    NilpotencyFailure(u32),

    #[error("series has zero linear coefficient and cannot be reverted")]
    ZeroLinearCoefficient,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
