use thiserror::Error;

/// Reasons a running strategy is aborted.
///
/// All of them are reported as a "diverged" trial by the experiment layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EsError {
    #[error("non-finite fitness {value} at generation {generation}")]
    NonFiniteFitness { generation: u64, value: f64 },
    #[error("mutation strength {sigma:e} left [1e-300, 1e300] at generation {generation}")]
    SigmaOutOfRange { generation: u64, sigma: f64 },
    #[error("non-finite search point or path component at generation {generation}")]
    NonFiniteState { generation: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("truncation ratio must lie in (0, 1), got {0}")]
    InvalidTruncationRatio(f64),
    #[error("progress rate has no sign change on [{lower}, {upper}]")]
    NoBracket { lower: f64, upper: f64 },
}
