//! Quantum channels in Kraus form.

use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::{c, pauli, CMatrix, Operator};
use crate::random::haar_unitary;
use crate::state::DensityState;
use crate::tolerance::CHANNEL_TOL;

/// `ρ ↦ Σ K_μ ρ K_μ†`, with the completeness defect `‖Σ K†K − 𝟙‖` recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    operators: Vec<Operator>,
    completeness_defect: f64,
}

impl KrausChannel {
    /// Accepts any non-empty set of equally sized operators; the defect is
    /// computed but not enforced.
    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?
            .dim();
        for k in &operators {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
        }
        let sum = operators.iter().fold(CMatrix::zeros(dim, dim), |acc, k| {
            acc + k.matrix().adjoint() * k.matrix()
        });
        let completeness_defect =
            Operator::from_matrix_unchecked(sum - CMatrix::identity(dim, dim)).norm();
        Ok(Self {
            dim,
            operators,
            completeness_defect,
        })
    }

    /// Like [`KrausChannel::new`] but rejects a defect above `tol`.
    pub fn validated(operators: Vec<Operator>, tol: f64) -> Result<Self> {
        let ch = Self::new(operators)?;
        if ch.completeness_defect > tol {
            return Err(Error::InvalidChannel(format!(
                "completeness defect {:.3e} exceeds {tol:.1e}",
                ch.completeness_defect
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![Operator::identity(dim)]).expect("identity is a channel")
    }

    pub fn unitary(u: Operator) -> Result<Self> {
        Self::validated(vec![u], CHANNEL_TOL)
    }

    /// Qubit dephasing that shrinks the Bloch x and y components by `1 - p`:
    /// Kraus set `{√(1-p/2) 𝟙, √(p/2) σz}`.
    pub fn phase_damping(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "phase damping p must lie in [0,1], got {p}"
            )));
        }
        Self::validated(
            vec![
                pauli::identity().scale_real((1.0 - p / 2.0).sqrt()),
                pauli::z().scale_real((p / 2.0).sqrt()),
            ],
            CHANNEL_TOL,
        )
    }

    /// Qubit decay `|1⟩ → |0⟩` with probability `γ`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!(
                "amplitude damping gamma must lie in [0,1], got {gamma}"
            )));
        }
        let k0 = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]])?;
        let k1 = Operator::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?;
        Self::validated(vec![k0, k1], CHANNEL_TOL)
    }

    /// `ρ ↦ (1-p) ρ + p 𝟙/D`.
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing p must lie in [0,1], got {p}"
            )));
        }
        let d2 = (dim * dim) as f64;
        let mut ops = vec![Operator::identity(dim).scale_real((1.0 - p + p / d2).sqrt())];
        let w = (p / d2).sqrt();
        // Weyl (clock-and-shift) operators other than the identity
        for a in 0..dim {
            for b in 0..dim {
                if a == 0 && b == 0 {
                    continue;
                }
                let m = CMatrix::from_fn(dim, dim, |i, j| {
                    if i == (j + a) % dim {
                        let phase = 2.0 * std::f64::consts::PI * (b * j) as f64 / dim as f64;
                        c(phase.cos() * w, phase.sin() * w)
                    } else {
                        c(0.0, 0.0)
                    }
                });
                ops.push(Operator::new(m)?);
            }
        }
        Self::validated(ops, CHANNEL_TOL)
    }

    /// Qubit rotation by `angle` about the unit axis `n`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(
                "rotation axis must be non-zero".into(),
            ));
        }
        let [x, y, z] = pauli::xyz();
        let n_sigma = &(&x.scale_real(axis[0] / norm) + &y.scale_real(axis[1] / norm))
            + &z.scale_real(axis[2] / norm);
        let half = angle / 2.0;
        let u = &pauli::identity().scale_real(half.cos()) - &n_sigma.scale(c(0.0, half.sin()));
        Self::unitary(u)
    }

    /// Random CPTP map: a Haar unitary on system ⊗ environment (environment
    /// of the same dimension, prepared in `|0⟩`) followed by tracing out the
    /// environment.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let u = haar_unitary(dim * dim, rng);
        // row index = sys_out * dim + env_out, column index = sys_in * dim + env_in
        let ops = (0..dim)
            .map(|env_out| {
                Operator::from_matrix_unchecked(CMatrix::from_fn(dim, dim, |i, j| {
                    u[(i * dim + env_out, j * dim)]
                }))
            })
            .collect();
        Self::new(ops).expect("Stinespring dilation yields a channel")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Schrödinger action on an arbitrary matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_dim(m.nrows())?;
        Ok(self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k.matrix() * m * k.matrix().adjoint()
            }))
    }

    /// Heisenberg action `X ↦ Σ K† X K` on an arbitrary matrix.
    pub fn heisenberg_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_dim(m.nrows())?;
        Ok(self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k.matrix().adjoint() * m * k.matrix()
            }))
    }

    /// Applies the channel to the first factor of `system ⊗ ancilla`.
    pub fn apply_on_system(&self, joint: &CMatrix, ancilla_dim: usize) -> Result<CMatrix> {
        self.check_dim(joint.nrows() / ancilla_dim)?;
        let id = CMatrix::identity(ancilla_dim, ancilla_dim);
        let n = joint.nrows();
        Ok(self.operators.iter().fold(CMatrix::zeros(n, n), |acc, k| {
            let big = k.matrix().kronecker(&id);
            acc + &big * joint * big.adjoint()
        }))
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        self.check_dim(next.dim)?;
        let mut ops = Vec::with_capacity(self.operators.len() * next.operators.len());
        for b in &next.operators {
            for a in &self.operators {
                ops.push(b * a);
            }
        }
        KrausChannel::new(ops)
    }
}

/// `ρ' = Σ K ρ K†`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityState) -> Result<DensityState> {
    let out = ch.apply_matrix(rho.matrix())?;
    DensityState::from_matrix(out)
}

/// `Ô(t) = Σ K† Ô K`.
pub fn heisenberg_apply(ch: &KrausChannel, obs: &Operator) -> Result<Operator> {
    if !obs.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: crate::operator::hermiticity_deviation(obs.matrix()),
        });
    }
    Ok(Operator::from_matrix_unchecked(
        ch.heisenberg_matrix(obs.matrix())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::pauli_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityState::random_full_rank(3, 0.01, &mut rng);
        let id = KrausChannel::identity(3);
        let out = apply_channel(&id, &rho).unwrap();
        assert!(out.operator().max_abs_diff(rho.operator()) < 1e-15);
        let obs = crate::basis::gell_mann_basis(3).unwrap().element(4).clone();
        assert!(heisenberg_apply(&id, &obs).unwrap().max_abs_diff(&obs) < 1e-15);
    }

    #[test]
    fn phase_damping_on_plus_state() {
        // ρ = |+⟩⟨+| has Bloch x = 1; mixing with σz ρ σz at weight 1/4 leaves 1 - 2/4
        let plus = DensityState::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let ch = KrausChannel::phase_damping(0.5).unwrap();
        let out = apply_channel(&ch, &plus).unwrap();
        assert!((out.expectation(&pauli::x()) - 0.5).abs() < 1e-14);
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((out.matrix()[(0, 1)].re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn phase_damping_heisenberg_on_sigma_x() {
        let ch = KrausChannel::phase_damping(0.5).unwrap();
        let bx = pauli_basis().element(1).clone();
        let out = heisenberg_apply(&ch, &bx).unwrap();
        assert!(out.max_abs_diff(&bx.scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn unitary_heisenberg_is_conjugation() {
        let ch = KrausChannel::rotation([0.3, -0.2, 0.9], 1.1).unwrap();
        let u = ch.operators()[0].clone();
        let obs = pauli::x();
        let expect = &(&u.adjoint() * &obs) * &u;
        assert!(heisenberg_apply(&ch, &obs).unwrap().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn maximally_mixed_keeps_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in [2, 3] {
            let ch = KrausChannel::random(d, &mut rng);
            let out = apply_channel(&ch, &DensityState::maximally_mixed(d)).unwrap();
            assert!((out.operator().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_channels_are_complete() {
        assert!(
            KrausChannel::amplitude_damping(0.3)
                .unwrap()
                .completeness_defect()
                < 1e-14
        );
        assert!(
            KrausChannel::depolarizing(3, 0.4)
                .unwrap()
                .completeness_defect()
                < 1e-13
        );
        assert!(KrausChannel::phase_damping(1.5).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(KrausChannel::random(4, &mut rng).completeness_defect() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = KrausChannel::identity(2);
        let rho = DensityState::maximally_mixed(3);
        assert!(matches!(
            apply_channel(&ch, &rho),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
        assert!(KrausChannel::new(vec![Operator::identity(2), Operator::identity(3)]).is_err());
    }

    #[test]
    fn non_hermitian_observable_rejected() {
        let ch = KrausChannel::identity(2);
        let m = Operator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        assert!(heisenberg_apply(&ch, &m).is_err());
    }
}
