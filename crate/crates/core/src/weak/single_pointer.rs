//! One-pointer scheme: a single qubit pointer carries both couplings, and two
//! configurations with tilted pointer observables are combined.

use crate::error::Result;
use crate::operator::{CMatrix, Operator};

use super::pointer::{coupling_propagator, tilted_pointer, PointerConfig};
use super::two_pointer::ProtocolRun;

/// Pointer observables `(early, late)` of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Configuration {
    /// early `(σz+σx)/√2`, late `(−σz+σx)/√2`
    First,
    /// early `(σz−σx)/√2`, late `(σz+σx)/√2`
    Second,
}

impl Configuration {
    pub const BOTH: [Configuration; 2] = [Configuration::First, Configuration::Second];

    fn pointer_ops(self) -> (Operator, Operator) {
        match self {
            Configuration::First => (tilted_pointer(1.0, 1.0), tilted_pointer(-1.0, 1.0)),
            Configuration::Second => (tilted_pointer(1.0, -1.0), tilted_pointer(1.0, 1.0)),
        }
    }
}

/// Probability of reading `σz = +1` on the pointer after both couplings.
pub fn single_pointer_p_plus(run: &ProtocolRun, which: Configuration) -> Result<f64> {
    let (early, late) = which.pointer_ops();
    let eps = run.config.epsilon();
    let u1 = coupling_propagator(&run.obs_early, &early, eps, 0, 1)?;
    let u2 = coupling_propagator(&run.obs_late, &late, eps, 0, 1)?;
    let mut joint: CMatrix = run.state.matrix().kronecker(&PointerConfig::pointer_init());
    joint = &u1 * joint * u1.adjoint();
    joint = run.channel.apply_on_system(&joint, 2)?;
    joint = &u2 * joint * u2.adjoint();
    let p: f64 = (0..run.dim()).map(|s| joint[(2 * s, 2 * s)].re).sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Exact pointer `⟨σz⟩` for both configurations; `(E1+E2)/2 ≈ ε² Tr ρ{B_i, B_j(t₂)}`.
pub fn single_pointer_expectations(run: &ProtocolRun) -> Result<(f64, f64)> {
    let e1 = 2.0 * single_pointer_p_plus(run, Configuration::First)? - 1.0;
    let e2 = 2.0 * single_pointer_p_plus(run, Configuration::Second)? - 1.0;
    Ok((e1, e2))
}
