use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    /// The logarithm is not unique because the target is (numerically) in the cut locus.
    #[error("target lies in the cut locus of the base point (margin {margin:.3e})")]
    CutLocus { margin: f64 },

    #[error("degenerate tangent plane: |u ^ v| = {0:.3e}")]
    DegenerateSpan(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite objective value {value} at step {step}")]
    NonFiniteObjective { step: u64, value: f64 },

    #[error("minimiser is degenerate: Hessian eigenvalue estimate {0:.3e} is not positive")]
    DegenerateMinimum(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
