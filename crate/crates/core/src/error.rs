//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Degenerate geometry (zero-area triangle, projection from a circle
    /// center, zero-length segment, ...).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A coefficient violated its sign constraint at a quadrature point.
    #[error("coefficient {name} = {value} at ({x}, {y}) violates {constraint}")]
    CoefficientBound {
        name: &'static str,
        value: f64,
        x: f64,
        y: f64,
        constraint: &'static str,
    },

    /// The two branches of a manufactured solution disagree at an interface
    /// vertex, i.e. the claimed exact solution is not continuous.
    #[error("exact-solution branches differ by {gap:e} at interface vertex ({x}, {y})")]
    BranchMismatch { x: f64, y: f64, gap: f64 },

    /// A point could not be located inside any mesh triangle.
    #[error("point ({x}, {y}) lies outside the mesh")]
    PointOutsideMesh { x: f64, y: f64 },

    /// Conjugate gradients ran out of iterations. Carries the best iterate
    /// so callers can inspect how far the solve got.
    #[error("solver hit max_iters = {iterations} with relative residual {relative_residual:e}")]
    SolverMaxIters {
        iterations: usize,
        relative_residual: f64,
        best_iterate: Vec<f64>,
    },

    /// Wraps a failure with the refinement level it occurred at.
    #[error("at refinement level h = {h}: {source}")]
    AtLevel {
        h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(#[from] serde_json::Error),
}

impl Error {
    pub fn at_level(self, h: f64) -> Self {
        Error::AtLevel {
            h,
            source: Box::new(self),
        }
    }
}
