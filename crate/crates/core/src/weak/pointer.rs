use log::warn;

use crate::error::{Error, Result};
use crate::operator::{c, pauli, CMatrix, Operator, ONE};

/// Coupling strengths above this are flagged as leaving the weak regime.
pub const WEAK_REGIME_WARN: f64 = 0.9;

/// Spin-½ pointer settings: coupling strength `ε` and the initial pointer
/// state `|↑x⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerConfig {
    epsilon: f64,
}

impl PointerConfig {
    /// `ε` must lie in `[0, 1)`; `ε = 0` switches the coupling off.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must satisfy 0 <= eps < 1, got {epsilon}"
            )));
        }
        if epsilon > WEAK_REGIME_WARN {
            warn!("coupling eps = {epsilon:.3} is outside the weak regime");
        }
        Ok(Self { epsilon })
    }

    pub fn from_eps2(eps2: f64) -> Result<Self> {
        if eps2 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "eps^2 must be >= 0, got {eps2}"
            )));
        }
        Self::new(eps2.sqrt())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eps2(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    /// `|↑x⟩⟨↑x|` in the `σz` eigenbasis `(|↑z⟩, |↓z⟩)`.
    pub fn pointer_init() -> CMatrix {
        CMatrix::from_element(2, 2, c(0.5, 0.0))
    }
}

/// `exp(iθ·obs⊗τ)` for a pointer involution `τ` (`τ² = 𝟙`), with the pointer
/// placed at `slot` among `pointers` trailing qubits. Built from the spectral
/// decomposition of `obs` as `Σ_k P_k ⊗ (cos(θb_k) + i sin(θb_k) τ)`.
pub fn coupling_propagator(
    obs: &Operator,
    pointer_op: &Operator,
    theta: f64,
    slot: usize,
    pointers: usize,
) -> Result<CMatrix> {
    if !obs.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: crate::operator::hermiticity_deviation(obs.matrix()),
        });
    }
    assert!(slot < pointers, "pointer slot out of range");
    let (values, vectors) = obs.eigh();
    let d = obs.dim();
    let total = d << pointers;
    let mut out = CMatrix::zeros(total, total);
    let id2 = CMatrix::identity(2, 2);
    for (k, &b) in values.iter().enumerate() {
        let col = vectors.column(k);
        let proj = col * col.adjoint();
        let rot =
            &id2 * c((theta * b).cos(), 0.0) + pointer_op.matrix() * c(0.0, (theta * b).sin());
        let mut factor = proj;
        for s in 0..pointers {
            factor = if s == slot {
                factor.kronecker(&rot)
            } else {
                factor.kronecker(&id2)
            };
        }
        out += factor;
    }
    Ok(out)
}

/// `exp(-i(ε/2)·obs⊗σy)` on system ⊗ pointer.
pub fn coupling_unitary(obs: &Operator, config: &PointerConfig) -> Result<Operator> {
    let m = coupling_propagator(obs, &pauli::y(), -config.epsilon / 2.0, 0, 1)?;
    Operator::new(m)
}

/// `(σz ± σx)/√2`-type pointer observables.
pub fn tilted_pointer(z_weight: f64, x_weight: f64) -> Operator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_matrix_unchecked(CMatrix::from_row_slice(
        2,
        2,
        &[
            ONE * (z_weight * s),
            ONE * (x_weight * s),
            ONE * (x_weight * s),
            ONE * (-z_weight * s),
        ],
    ))
}
