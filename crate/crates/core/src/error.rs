use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid case definition: {0}")]
    InvalidSpec(String),

    #[error("inconsistent case definition: {0}")]
    InconsistentSpec(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("degenerate element {element}: jacobian determinant {det_j:e}")]
    DegenerateElement { element: usize, det_j: f64 },

    #[error("underconstrained model: stiffness matrix is not positive definite over the free dofs")]
    Underconstrained,

    #[error("inconsistent state: {0}")]
    InconsistentState(String),

    #[error("non-finite strain at gauss point {gauss_point}, time index {time}")]
    NonFiniteStrain { gauss_point: usize, time: usize },

    #[error("corrupted state: zero deviatoric trial stress with positive plastic demand")]
    CorruptedState,

    #[error("low-rank compression failed: relative residual {residual:e} above {tol:e} after {terms} terms")]
    CompressionFailure { residual: f64, tol: f64, terms: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("multi-time grid: {0}")]
    Grid(String),

    #[error("time step {time}: equilibrium not reached after {iterations} iterations (residual {residual:e})")]
    StepFailure { time: usize, iterations: usize, residual: f64 },

    #[error("nonlinear iteration diverged at iteration {iteration} (e = {error:e})")]
    Diverged { iteration: usize, error: f64 },

    #[error("point ({0}, {1}) lies outside the mesh")]
    OutsideMesh(f64, f64),

    #[error("{path}:{line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
