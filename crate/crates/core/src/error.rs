//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by grid, field and state construction and by the
/// differential / quadrature operators.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("axis `{name}`: {reason}")]
    InvalidAxis { name: String, reason: String },

    #[error("grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} values but grid has {expected} cells")]
    LengthMismatch { got: usize, expected: usize },

    #[error("non-finite value {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    #[error("negative density {value} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("density integrates to {norm}, expected 1 within {tol}")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("axis `{0}` is not a continuous axis")]
    UnsupportedAxis(String),

    #[error("no axis named `{0}`")]
    NoSuchAxis(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("axis name `{0}` appears in both factors")]
    AxisCollision(String),

    #[error("density is below the floor everywhere; polar decomposition is degenerate")]
    DegenerateState,

    #[error("hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("hamiltonian incompatible with state grid: {0}")]
    IncompatibleAxes(String),

    #[error("integration: {0}")]
    Integration(String),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("observable: {0}")]
    Observable(String),

    #[error("conditioning on a cell with negligible marginal probability ({0:.3e})")]
    ConditioningOnNull(f64),

    #[error("cosmology: {0}")]
    Cosmology(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
