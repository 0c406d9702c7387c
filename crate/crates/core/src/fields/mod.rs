//! Sampled fields on a periodic box and the operator toolbox built on them.

mod fft;
mod grid;
mod ops;
mod storage;

pub use grid::Grid;
pub use ops::{inner, integrate, Discretization, Operators};
pub use storage::{check_grids, Field, ScalarField, TensorField, VectorField};

pub(crate) use storage::{det_sum_by, det_sum_many};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("data length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("inconsistent pressure problem: right-hand side mean {mean:e} exceeds tolerance {tolerance:e}")]
    NonZeroMean { mean: f64, tolerance: f64 },
}
