use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Positive mass against zero reference mass in a divergence.
    #[error("support violation at label `{label}`: {direction} has positive mass where the reference has none")]
    Support { label: String, direction: &'static str },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("resource ceiling exceeded: {what} needs {required} > ceiling {ceiling}")]
    Resource {
        what: String,
        required: u128,
        ceiling: u128,
    },

    #[error("matrix is not positive definite: leading minor {index} is not positive")]
    NotPositiveDefinite { index: usize },

    #[error("posterior escapes the quadrature grid (boundary mass {boundary_mass:.3e} > {tolerance:.0e}); widen the grid")]
    Coverage { boundary_mass: f64, tolerance: f64 },

    #[error("{0}")]
    Parse(String),

    #[error("hard failure at n = {n}: {reason}")]
    BoundViolation { n: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
