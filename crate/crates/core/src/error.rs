use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),

    /// A child block is not strictly more correlated than its parent.
    #[error(
        "correlation levels are not nested: `{parent}` reaches {parent_hi} but `{child}` starts at {child_lo}"
    )]
    NestingViolation {
        parent: String,
        child: String,
        parent_hi: f64,
        child_lo: f64,
    },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemiDefinite { min_eigenvalue: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid cluster count k={k} for {n} points")]
    InvalidK { k: usize, n: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
