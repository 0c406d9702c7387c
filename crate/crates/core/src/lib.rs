//! Periodic-box solver for a simplified Ericksen–Leslie nematic liquid-crystal
//! system with shape parameter α, with runtime energy audits, a retarded
//! space-time mollifier, the local smallness quantity Φ and a parabolic
//! box-counting dimension estimator.

pub mod diagnostics;
pub mod fields;
pub mod initial;
pub mod lc_tensors;
pub mod mms;
pub mod mollifier;
pub mod random;
pub mod solver;
pub mod verify;

pub use fields::{Discretization, Grid, Operators, ScalarField, TensorField, VectorField};
pub use lc_tensors::ModelParams;
pub use solver::{SimState, Solver, SolverConfig};
