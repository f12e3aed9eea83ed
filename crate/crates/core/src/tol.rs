//! Numerical tolerances shared across the crate.

/// Maximum `|sum - 1|` for a probability vector or joint table.
pub const NORMALIZATION: f64 = 1e-12;

/// Entries below `-NEGATIVE_MASS` are rejected; entries in
/// `[-NEGATIVE_MASS, 0)` are read as zero.
pub const NEGATIVE_MASS: f64 = 1e-15;

/// Slack allowed in `|f(i) - f(j)| <= c(i, j)`.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;

/// Maximum gap between a cost and its path closure for it to count as tight.
pub const TIGHTNESS: f64 = 1e-12;

/// Maximum `|primal - dual|` accepted by [`crate::solve`].
pub const DUALITY_GAP: f64 = 1e-9;

/// Maximum margin residual of a coupling plan.
pub const MARGIN: f64 = 1e-9;

/// Two random measure families must carry the same weights to this accuracy.
pub const WEIGHT_MATCH: f64 = 1e-12;

/// Relative asymmetry allowed in a cost matrix.
pub const SYMMETRY: f64 = 1e-12;
