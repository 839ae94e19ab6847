use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid consensus counts: n={n}, inliers={inliers}, k={k}")]
    InvalidCounts { n: usize, inliers: usize, k: usize },

    #[error("target success probability must lie strictly inside (0, 1), got {0}")]
    InvalidTarget(f64),

    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error(
        "infeasible configuration: {inliers} inliers but a k={k} model needs at least {} to be verified",
        k + 1
    )]
    Infeasible { inliers: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,
}
