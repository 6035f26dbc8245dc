//! Process tomography from weakly measured two-time correlations.
//!
//! The crate simulates two-pointer (and single-pointer) weak measurements of
//! the temporal covariance matrix of a system in an arbitrary, possibly
//! thermal, state, and reconstructs the affine Heisenberg dynamics `(M, χ)`
//! and a Kraus decomposition of the channel from it. A Gaussian-channel
//! specialization works at the level of first and second moments.

// NaN must fail validity checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod channel;
pub mod covariance;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod operator;
pub mod random;
pub mod reconstruction;
pub mod state;
pub mod structure;
pub mod tolerance;
pub mod weak;

pub use basis::{gell_mann_basis, pauli_basis, OperatorBasis};
pub use channel::{apply_channel, heisenberg_apply, KrausChannel};
pub use error::{Error, Result};
pub use operator::{CMatrix, Operator};
pub use state::DensityState;
pub use structure::{structure_tensors, StructureTensors};
