//! Field algebra on the periodic square.

mod field;
mod grid;
pub mod ops;

use thiserror::Error;

pub use field::{ScalarField, SymTensorField, VectorField, VelocityGradient};
pub use grid::Grid;
pub use ops::Axis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("array has {found} samples, grid expects {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("vorticity has nonzero mean {0:e}; no periodic velocity exists")]
    NonzeroMean(f64),
}
