//! Two-pointer and single-pointer weak measurement of two-time correlations.

pub mod pointer;
pub mod sampling;
pub mod single_pointer;
pub mod systematic;
pub mod two_pointer;

pub use pointer::{coupling_unitary, PointerConfig};
pub use sampling::{sample_trials, TrialSampler};
pub use single_pointer::{single_pointer_expectations, Configuration};
pub use systematic::{systematic_bound, systematic_f};
pub use two_pointer::{
    back_action, product_expectation, product_variance, run_two_pointer, OutcomeDistribution,
    ProtocolRun,
};
