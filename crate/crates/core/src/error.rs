use thiserror::Error;

/// Structural problems with an algorithm or population description.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("capacity must be non-decreasing across rounds: L_{round} = {previous} > L_{next_round} = {next}", next_round = .round + 1)]
    NonMonotoneCapacity {
        round: usize,
        previous: u32,
        next: u32,
    },
    #[error("{what} must be at least 1")]
    ZeroParameter { what: String },
    #[error("{what} has {actual} entries, expected {expected} (one per round)")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
}

/// Failures raised while iterating the analytic estimates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("round {round}: capacity {capacity} is below the largest carried load {max_load}")]
    CapacityRegression {
        round: usize,
        capacity: u32,
        max_load: usize,
    },
    #[error("expected {expected} rank probabilities, got {actual}")]
    RankCount { expected: usize, actual: usize },
    #[error("invariant violated in round {round}: {detail}")]
    Invariant { round: usize, detail: String },
}

/// Invalid baseline configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("{what} must be at least 1")]
    ZeroParameter { what: &'static str },
    #[error("{algorithm} requires {requirement}")]
    Unsupported {
        algorithm: &'static str,
        requirement: &'static str,
    },
}
