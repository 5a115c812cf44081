use thiserror::Error;

/// Errors raised by the enumeration engine and the checks built on it.
#[derive(Debug, Error)]
pub enum GlabError {
    #[error("ground set of size {n} exceeds the exact-engine limit {limit}")]
    Capacity { n: usize, limit: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("pinning has zero probability")]
    InfeasiblePinning,

    #[error("reweighted distribution has empty support")]
    EmptySupport,

    #[error("distribution is not absolutely continuous with respect to the reference")]
    NotAbsolutelyContinuous,

    #[error("function vanishes on the support at configuration {0}")]
    ZeroOnSupport(usize),

    #[error("ratio undefined: entropy is zero")]
    UndefinedRatio,

    #[error("input is not homogeneous: {0}")]
    NotHomogeneous(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GlabError>;
