use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid degree: {0}")]
    InvalidDegree(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("axis {axis} has {nodes} nodes; at least 3 are required")]
    TooFewNodes { axis: usize, nodes: usize },

    #[error("3-form is not of G2 type: {0}")]
    NotG2Type(String),

    #[error("vectors are linearly dependent")]
    DependentVectors,

    #[error("plane is not coassociative (|phi| restricted = {0:e})")]
    NotCoassociative(f64),

    #[error("no normal-form frame: {0}")]
    NoNormalFrame(String),

    #[error("matrix is not in SL(4,Z): {0}")]
    NotSl4(String),

    #[error("metric not positive definite at node {node:?}: eigenvalues {eigenvalues:?}")]
    NotPositiveDefinite { node: Vec<usize>, eigenvalues: Vec<f64> },

    #[error("singular matrix at node {node:?}")]
    Singular { node: Vec<usize> },

    #[error("fibre volume must be a positive constant, got {0}")]
    InvalidTau(f64),

    #[error("degenerate slice: u∧u vanishes at node {node:?}")]
    NullSlice { node: Vec<usize> },

    #[error("surface map invalid: {0}")]
    InvalidSurface(String),

    #[error("inconsistent sign of h_{level} at node {node:?}")]
    SignChange { level: usize, node: Vec<usize> },

    #[error("{0}")]
    Classification(String),

    #[error("curve is not null: {0}")]
    NotNull(String),

    #[error("q vanishes at node {node:?}")]
    QVanishes { node: Vec<usize> },

    #[error("Newton failed to converge after {iterations} iterations (residual {residual:e})")]
    Diverged { iterations: usize, residual: f64, trace: Vec<f64> },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("report mismatch: {0}")]
    ReportMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (divergence, singularity) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. }
                | Error::LinearSolve(_)
                | Error::Singular { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NotG2Type(_)
                | Error::NullSlice { .. }
                | Error::QVanishes { .. }
                | Error::SignChange { .. }
        )
    }
}
