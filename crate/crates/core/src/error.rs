use thiserror::Error;

#[derive(Debug, Error)]
pub enum PptError {
    #[error("invalid convex body: {0}")]
    InvalidBody(String),

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis for n={n} has {count} exponents, above the cap of {cap}")]
    BasisTooLarge { n: u32, count: usize, cap: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh is degenerate for the basis: {0}")]
    DegenerateMesh(String),

    #[error("enumeration needs {tuples:.3e} tuples, budget is {budget}")]
    BudgetExceeded { tuples: f64, budget: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PptError>;
