use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Array shapes or grids of the operands do not agree.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A scalar parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The density dropped below the floor `ε` where the scheme needs it bounded below.
    #[error("density floor violated: min density {min} < floor {floor}")]
    DensityFloor { min: f64, floor: f64 },

    /// The mass-matrix solve broke down, which means the matrix was not positive definite.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Fixed-point iteration did not contract within the iteration budget.
    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    Contraction { iterations: usize, last_update: f64 },

    /// A stored history does not cover the requested time interval.
    #[error("history does not cover the requested time {requested} (covered [{start}, {end}])")]
    Coverage { requested: f64, start: f64, end: f64 },

    /// An initial-data or run specification violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input collection was empty or malformed.
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
