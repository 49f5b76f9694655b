//! Exact small-system simulation used as ground truth for the bounds in
//! `nisqbound-core`.
//!
//! States are dense `2^n x 2^n` density matrices. Qubit `k` is bit `k` of the
//! basis index, and `|0>` is the `+1` eigenvector of `Z`, matching the spin
//! convention of the Ising instances (`s = +1` is bit 0).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod contraction;
pub mod density;
mod error;
pub mod lindblad;
pub mod linalg;
pub mod mirror;
pub mod suites;

pub use density::DensityMatrix;
pub use error::{Error, Result};

/// Largest register accepted for circuit simulation.
pub const CIRCUIT_CAP: usize = 10;
/// Largest register accepted for Lindblad integration.
pub const LINDBLAD_CAP: usize = 6;
/// Largest register accepted for mirror descent and contraction checks.
pub const DENSE_CAP: usize = 8;
