//! Density matrices.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::operator::{c, CMatrix, Operator};
use crate::random::haar_unitary;
use crate::tolerance::{SINGULAR_STATE_TOL, STATE_TOL};

/// A validated density matrix with its smallest eigenvalue cached.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    op: Operator,
    eigen_floor: f64,
}

impl DensityState {
    /// Validates unit trace and positivity within [`STATE_TOL`].
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::InvalidState(
                "density matrix is not Hermitian".into(),
            ));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace is {:.6}{:+.6}i, expected 1",
                tr.re, tr.im
            )));
        }
        let (values, _) = op.eigh();
        let eigen_floor = values[0];
        if eigen_floor < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {eigen_floor:.3e}"
            )));
        }
        Ok(Self { op, eigen_floor })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(Operator::hermitian(m)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale_real(1.0 / dim as f64),
            eigen_floor: 1.0 / dim as f64,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / c(norm, 0.0);
        Self::new(Operator::from_matrix_unchecked(&v * v.adjoint()))
    }

    /// Gibbs state `exp(-βH)/Z`.
    pub fn thermal(hamiltonian: &Operator, beta: f64) -> Result<Self> {
        if !hamiltonian.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: f64::NAN,
            });
        }
        let (values, _) = hamiltonian.eigh();
        let shift = values[0];
        let unnorm = hamiltonian.map_spectrum(|e| c((-beta * (e - shift)).exp(), 0.0));
        let z = unnorm.trace().re;
        Self::new(unnorm.scale_real(1.0 / z))
    }

    /// `V diag(p) V†` for a basis `V` (columns) and probabilities `p`.
    pub fn from_spectrum(vectors: &CMatrix, probs: &[f64]) -> Result<Self> {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| c(p, 0.0)),
        ));
        Self::from_matrix(vectors * d * vectors.adjoint())
    }

    /// Random state whose eigenvalues are all at least `floor`.
    pub fn random_full_rank<R: Rng + ?Sized>(dim: usize, floor: f64, rng: &mut R) -> Self {
        assert!(floor * dim as f64 <= 1.0, "eigenvalue floor too large");
        let w = dirichlet(dim, rng);
        let probs: Vec<f64> = w
            .iter()
            .map(|x| floor + (1.0 - floor * dim as f64) * x)
            .collect();
        let u = haar_unitary(dim, rng);
        Self::from_spectrum(&u, &probs).expect("construction yields a valid state")
    }

    /// Random state of rank `dim - 1`.
    pub fn random_singular<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut probs = vec![0.0; dim];
        let w = dirichlet(dim - 1, rng);
        probs[..dim - 1].copy_from_slice(&w);
        let u = haar_unitary(dim, rng);
        Self::from_spectrum(&u, &probs).expect("construction yields a valid state")
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    pub fn singular(&self) -> bool {
        self.singular_at(SINGULAR_STATE_TOL)
    }

    pub fn singular_at(&self, tol: f64) -> bool {
        self.eigen_floor < tol
    }

    /// `Tr(ρ A)`, real part.
    pub fn expectation(&self, obs: &Operator) -> f64 {
        self.op.trace_product(obs).re
    }

    pub fn trace_distance(&self, other: &DensityState) -> f64 {
        0.5 * crate::operator::trace_norm_hermitian(&(self.matrix() - other.matrix()))
    }
}

fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
    let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_trace_and_negativity() {
        let m = Operator::identity(2);
        assert!(matches!(DensityState::new(m), Err(Error::InvalidState(_))));
        let neg = Operator::from_real_rows(&[&[1.2, 0.0], &[0.0, -0.2]]).unwrap();
        assert!(matches!(
            DensityState::new(neg),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn pure_state_is_singular() {
        let s = DensityState::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(s.singular());
        assert!(!DensityState::maximally_mixed(3).singular());
    }

    #[test]
    fn thermal_qubit_populations() {
        let h = pauli::z().scale_real(0.5);
        let s = DensityState::thermal(&h, 2.0).unwrap();
        let p_excited = s.matrix()[(0, 0)].re;
        // gap 1 at β = 2
        let expected = (-2.0_f64).exp() / (1.0 + (-2.0_f64).exp());
        assert!(
            (p_excited - expected).abs() < 1e-12,
            "{p_excited} vs {expected}"
        );
        assert!(!s.singular());
    }

    #[test]
    fn random_states_respect_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3, 4] {
            let s = DensityState::random_full_rank(d, 0.05, &mut rng);
            assert!(s.eigen_floor() >= 0.05 - 1e-12);
            let t = DensityState::random_singular(d, &mut rng);
            assert!(t.singular());
        }
    }
}
