use thiserror::Error;

/// Errors produced by the design, solver, circuit and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix exponential overflow: |A t|_1 = {norm:e}")]
    ExpmOverflow { norm: f64 },

    #[error("invalid design spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("newton refinement diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("singular jacobian encountered during refinement")]
    SingularJacobian,

    #[error("non-positive entry {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("repeated eigenvalue detected (gap {gap:e})")]
    RepeatedEigenvalue { gap: f64 },

    #[error("modal structure deviates by {deviation:e} (tolerance {tolerance:e})")]
    ModalMismatch { deviation: f64, tolerance: f64 },

    #[error("no solution satisfies the convexity constraints")]
    EmptySelection,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("circuit equations disagree with block model at row {row}")]
    ModelAssembly { row: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
