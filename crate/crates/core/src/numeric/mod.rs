//! Small dense linear algebra and the fixed-step integrator.

mod eigen;
mod lu;
mod matrix;
mod rk4;

pub use eigen::{eigenvalues, MAX_DIMENSION, MAX_SWEEPS};
pub use lu::{invert, Lu, SINGULAR_PIVOT};
pub use matrix::DenseMatrix;
pub use num_complex::Complex64;
pub use rk4::rk4_step;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is singular to working precision (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("eigenvalue kernel supports dimension <= {max}, got {dim}")]
    TooLarge { dim: usize, max: usize },
    #[error("QR iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("integration step must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },
    #[error("non-finite derivative at t = {t} for state component {index}")]
    NonFiniteDerivative { t: f64, index: usize },
}
