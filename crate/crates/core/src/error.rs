use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("user unreachable: downlink rate is zero")]
    UnreachableUser,
    #[error("cache update rejected: {0}")]
    CacheUpdate(String),
    #[error("malformed resource-block assignment for user {user}")]
    MalformedRbVector { user: usize },
    #[error("reward weights must be non-negative and sum to 1, got {0:?}")]
    WeightSimplex([f64; 3]),
    #[error("codec error: {0}")]
    Codec(String),
    #[error("learning-rate schedule violates hypotheses: {0}")]
    Schedule(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
