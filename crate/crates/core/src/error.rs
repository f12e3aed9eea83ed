use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space must contain at least one point")]
    EmptySpace,

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("measures live on different spaces")]
    SpaceMismatch,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("masses sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("cost is not tight: c({i},{j}) exceeds its path closure by {gap}")]
    UntightCost { i: usize, j: usize, gap: f64 },

    #[error("duality gap {gap} exceeds tolerance")]
    DualityGapExceeded { gap: f64 },

    #[error("the two families carry different parameter weights (max difference {max_diff})")]
    WeightMismatch { max_diff: f64 },

    #[error("index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("transition matrix row {row} is not a probability vector (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
