//! Gaussian states and channels at the level of first and second moments.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)`, `Ω` is block diagonal with
//! `[[0, 1], [−1, 0]]`, and the vacuum covariance is `𝟙/2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::covariance::{Provenance, TemporalCovariance};
use crate::error::{Error, Result};
use crate::reconstruction::AffineDynamics;

/// Symmetry tolerance on covariance inputs.
const SYMMETRY_TOL: f64 = 1e-10;
/// Slack on the bound `ν ≥ 1/2` for exact moments.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

fn check_symmetric(cov: &DMatrix<f64>) -> Result<()> {
    if !cov.is_square() || !cov.nrows().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "covariance must be square of even size, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let dev = (cov - cov.transpose()).amax();
    if dev > SYMMETRY_TOL * (1.0 + cov.amax()) {
        return Err(Error::InvalidArgument(format!(
            "covariance is not symmetric (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// Williamson values: moduli of the eigenvalues of `iΩσ`, one per mode, descending.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(cov)?;
    let n = cov.nrows() / 2;
    let prod = omega(n) * cov;
    let mut moduli: Vec<f64> = prod
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    // eigenvalues come in ±iν pairs
    Ok((0..n)
        .map(|k| 0.5 * (moduli[2 * k] + moduli[2 * k + 1]))
        .collect())
}

/// `exp(ΩH)` for a random symmetric `H` with entries of scale `strength`.
pub fn random_symplectic<R: Rng + ?Sized>(
    n_modes: usize,
    strength: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let m = 2 * n_modes;
    let g = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal) * strength);
    let h = (&g + g.transpose()) * 0.5;
    (omega(n_modes) * h).exp()
}

/// `exp(θΩ)`-type phase rotation on one mode: `x ↦ x cosθ + p sinθ`.
pub fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub n_modes: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&cov)?;
        if mean.len() != cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: cov.nrows(),
                found: mean.len(),
            });
        }
        let nu = symplectic_eigenvalues(&cov)?;
        let smallest = nu.last().copied().unwrap_or(0.5);
        if smallest < 0.5 - UNCERTAINTY_TOL {
            return Err(Error::UncertaintyViolation { nu: smallest });
        }
        Ok(Self {
            n_modes: cov.nrows() / 2,
            mean,
            cov,
        })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(n_modes, 0.0)
    }

    /// Mean occupation `n̄` in every mode, `σ = (n̄ + 1/2)𝟙`.
    pub fn thermal(n_modes: usize, nbar: f64) -> Self {
        Self {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * (nbar + 0.5),
        }
    }

    /// Single-mode squeezed vacuum `diag(e^{−2r}, e^{2r})/2`.
    pub fn squeezed_vacuum(r: f64) -> Self {
        Self {
            n_modes: 1,
            mean: DVector::zeros(2),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![
                (-2.0 * r).exp() / 2.0,
                (2.0 * r).exp() / 2.0,
            ])),
        }
    }

    /// `S W Sᵀ` with Williamson values `ν_k ∈ [1/2, 1/2 + spread]` and a random displacement.
    pub fn random<R: Rng + ?Sized>(n_modes: usize, spread: f64, rng: &mut R) -> Self {
        let w = DMatrix::from_diagonal(&DVector::from_iterator(
            2 * n_modes,
            (0..n_modes).flat_map(|_| {
                let nu = 0.5 + spread * rng.gen::<f64>();
                [nu, nu]
            }),
        ));
        let s = random_symplectic(n_modes, 0.4, rng);
        let cov = &s * w * s.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        let mean = DVector::from_fn(2 * n_modes, |_, _| rng.sample::<f64, _>(StandardNormal));
        Self { n_modes, mean, cov }
    }
}

/// `η ↦ Mη + χ` on the means, `σ ↦ MσMᵀ + N` on the covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannelTruth {
    pub m: DMatrix<f64>,
    pub chi: DVector<f64>,
    pub noise: DMatrix<f64>,
}

impl GaussianChannelTruth {
    pub fn new(m: DMatrix<f64>, chi: DVector<f64>, noise: DMatrix<f64>) -> Result<Self> {
        let size = m.nrows();
        if !m.is_square() || !size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "M must be square of even size".into(),
            ));
        }
        for found in [chi.len(), noise.nrows(), noise.ncols()] {
            if found != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found,
                });
            }
        }
        check_symmetric(&noise)?;
        Ok(Self { m, chi, noise })
    }

    pub fn identity(n_modes: usize) -> Self {
        let s = 2 * n_modes;
        Self {
            m: DMatrix::identity(s, s),
            chi: DVector::zeros(s),
            noise: DMatrix::zeros(s, s),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    /// Loss with transmissivity `η` into a thermal bath of occupation `n̄`.
    pub fn lossy(n_modes: usize, eta: f64, nbar: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || nbar < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lossy channel needs 0 <= eta <= 1 and nbar >= 0, got {eta}, {nbar}"
            )));
        }
        let s = 2 * n_modes;
        Self::new(
            DMatrix::identity(s, s) * eta.sqrt(),
            DVector::zeros(s),
            DMatrix::identity(s, s) * ((1.0 - eta) * (nbar + 0.5)),
        )
    }

    /// Random symplectic, partial loss, thermal plus classical noise, displacement.
    pub fn random<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> Self {
        let s = 2 * n_modes;
        let eta = 0.5 + 0.5 * rng.gen::<f64>();
        let nu = 0.5 + rng.gen::<f64>();
        let sym = random_symplectic(n_modes, 0.4, rng);
        let g = DMatrix::from_fn(s, s, |_, _| 0.2 * rng.sample::<f64, _>(StandardNormal));
        let classical = &g * g.transpose();
        Self {
            m: sym * eta.sqrt(),
            chi: DVector::from_fn(s, |_, _| rng.sample::<f64, _>(StandardNormal)),
            noise: DMatrix::identity(s, s) * ((1.0 - eta) * nu) + classical,
        }
    }

    /// Complete-positivity test `N + (i/2)(Ω − MΩMᵀ) ≥ 0`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let w = omega(self.n_modes());
        let skew = &w - &self.m * &w * self.m.transpose();
        let h = DMatrix::from_fn(self.noise.nrows(), self.noise.ncols(), |i, j| {
            num_complex::Complex64::new(self.noise[(i, j)], 0.5 * skew[(i, j)])
        });
        let eig = crate::operator::Operator::from_matrix_unchecked(h).eigh().0;
        eig[0] >= -tol
    }
}

pub fn propagate(state: &GaussianState, ch: &GaussianChannelTruth) -> Result<GaussianState> {
    if state.mean.len() != ch.m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: ch.m.nrows(),
            found: state.mean.len(),
        });
    }
    let cov = &ch.m * &state.cov * ch.m.transpose() + &ch.noise;
    Ok(GaussianState {
        n_modes: state.n_modes,
        mean: &ch.m * &state.mean + &ch.chi,
        cov: (&cov + cov.transpose()) * 0.5,
    })
}

/// `σ(t,t₀) = M σ(t₀,t₀)`: the added noise is uncorrelated with time-`t₀` quadratures.
pub fn temporal_covariance_gaussian(
    state: &GaussianState,
    ch: &GaussianChannelTruth,
) -> Result<TemporalCovariance> {
    let after = propagate(state, ch)?;
    Ok(TemporalCovariance {
        dim_ops: state.mean.len(),
        sigma: &ch.m * &state.cov,
        mean_early: state.mean.clone(),
        mean_late: after.mean,
        provenance: Provenance::Exact,
    })
}

pub fn equal_time_gaussian(state: &GaussianState) -> TemporalCovariance {
    TemporalCovariance {
        dim_ops: state.mean.len(),
        sigma: state.cov.clone(),
        mean_early: state.mean.clone(),
        mean_late: state.mean.clone(),
        provenance: Provenance::Exact,
    }
}

/// `M = σ(t,t₀)σ(t₀,t₀)⁻¹`, `χ = ⟨η(t)⟩ − M⟨η(t₀)⟩`. The only failure mode is
/// an equal-time covariance that violates the uncertainty bound.
pub fn recover_affine_gaussian(
    cov_t: &TemporalCovariance,
    cov_0: &TemporalCovariance,
) -> Result<AffineDynamics> {
    recover_affine_gaussian_with_tol(cov_t, cov_0, UNCERTAINTY_TOL)
}

pub fn recover_affine_gaussian_with_tol(
    cov_t: &TemporalCovariance,
    cov_0: &TemporalCovariance,
    tol: f64,
) -> Result<AffineDynamics> {
    if cov_t.dim_ops != cov_0.dim_ops {
        return Err(Error::DimensionMismatch {
            expected: cov_0.dim_ops,
            found: cov_t.dim_ops,
        });
    }
    let sym = (&cov_0.sigma + cov_0.sigma.transpose()) * 0.5;
    let nu = symplectic_eigenvalues(&sym)?;
    let smallest = nu.last().copied().unwrap_or(0.5);
    if smallest < 0.5 - tol {
        return Err(Error::UncertaintyViolation { nu: smallest });
    }
    let mt = sym
        .transpose()
        .lu()
        .solve(&cov_t.sigma.transpose())
        .ok_or(Error::UncertaintyViolation { nu: smallest })?;
    let m = mt.transpose();
    let chi = &cov_t.mean_late - &m * &cov_t.mean_early;
    Ok(AffineDynamics { m, chi })
}

/// Correlations needed for `n` modes, `(2n)²`.
pub fn correlation_count(n_modes: usize) -> usize {
    4 * n_modes * n_modes
}

/// Moment estimates as exact values plus independent `N(0, s²)` noise per
/// entry, `s = 2/(ε²√N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyMoments {
    pub eps2: f64,
    pub trials: u64,
}

impl NoisyMoments {
    pub fn std_dev(&self) -> f64 {
        2.0 / (self.eps2 * (self.trials as f64).sqrt())
    }

    pub fn perturb<R: Rng + ?Sized>(
        &self,
        cov: &TemporalCovariance,
        rng: &mut R,
    ) -> TemporalCovariance {
        let normal = Normal::new(0.0, self.std_dev()).expect("positive std dev");
        let mut out = cov.clone();
        for x in out.sigma.iter_mut() {
            *x += normal.sample(rng);
        }
        for x in out.mean_early.iter_mut().chain(out.mean_late.iter_mut()) {
            *x += normal.sample(rng);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn vacuum_rotation_is_invariant() {
        let mut st = GaussianState::vacuum(1);
        st.mean = DVector::from_vec(vec![1.0, 0.0]);
        let ch = GaussianChannelTruth::new(
            rotation(std::f64::consts::FRAC_PI_2),
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let out = propagate(&st, &ch).unwrap();
        assert!((&out.cov - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        assert!((out.mean[0]).abs() < 1e-15 && (out.mean[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn thermal_through_loss() {
        let st = GaussianState::thermal(1, 1.0);
        let ch = GaussianChannelTruth::new(
            DMatrix::identity(2, 2) * 0.5f64.sqrt(),
            DVector::zeros(2),
            DMatrix::identity(2, 2) * 0.25,
        )
        .unwrap();
        let out = propagate(&st, &ch).unwrap();
        assert!((&out.cov - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn displacement_shifts_mean() {
        let ch = GaussianChannelTruth::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![1.0, 0.0]),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let out = propagate(&GaussianState::vacuum(1), &ch).unwrap();
        assert_eq!(out.mean, DVector::from_vec(vec![1.0, 0.0]));
    }

    #[test]
    fn temporal_covariance_examples() {
        let th = GaussianState::thermal(1, 0.7);
        let id = temporal_covariance_gaussian(&th, &GaussianChannelTruth::identity(1)).unwrap();
        assert_eq!(id.sigma, th.cov);
        let rot = GaussianChannelTruth::new(rotation(0.3), DVector::zeros(2), DMatrix::zeros(2, 2))
            .unwrap();
        let c = temporal_covariance_gaussian(&th, &rot).unwrap();
        assert!((c.sigma - rotation(0.3) * 1.2).amax() < 1e-15);
        let s = 1.7;
        let sq = GaussianChannelTruth::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![s, 1.0 / s])),
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let c = temporal_covariance_gaussian(&GaussianState::vacuum(1), &sq).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![s / 2.0, 0.5 / s]));
        assert!((c.sigma - want).amax() < 1e-15);
    }

    #[test]
    fn symplectic_spectrum_examples() {
        let v = symplectic_eigenvalues(&GaussianState::vacuum(1).cov).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-14);
        let t = symplectic_eigenvalues(&(DMatrix::identity(2, 2) * 2.5)).unwrap();
        assert!((t[0] - 2.5).abs() < 1e-14);
        let sq = symplectic_eigenvalues(&GaussianState::squeezed_vacuum(0.8).cov).unwrap();
        assert!((sq[0] - 0.5).abs() < 1e-12);
        assert!(
            symplectic_eigenvalues(&DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0])).is_err()
        );
    }

    #[test]
    fn symplectic_spectrum_is_invariant() {
        let mut r = rng(3);
        for n in 1..=3 {
            let st = GaussianState::random(n, 2.0, &mut r);
            let s = random_symplectic(n, 0.5, &mut r);
            let w = omega(n);
            assert!((&s * &w * s.transpose() - &w).amax() < 1e-10);
            let a = symplectic_eigenvalues(&st.cov).unwrap();
            let b = symplectic_eigenvalues(&(&s * &st.cov * s.transpose())).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exact_recovery_of_symplectic_displacement() {
        let mut r = rng(4);
        for n in 1..=2 {
            let s = random_symplectic(n, 0.5, &mut r);
            let d = DVector::from_fn(2 * n, |_, _| r.gen::<f64>());
            let ch = GaussianChannelTruth::new(s.clone(), d.clone(), DMatrix::zeros(2 * n, 2 * n))
                .unwrap();
            for st in [
                GaussianState::vacuum(n),
                GaussianState::random(n, 1.0, &mut r),
            ] {
                let ct = temporal_covariance_gaussian(&st, &ch).unwrap();
                let rec = recover_affine_gaussian(&ct, &equal_time_gaussian(&st)).unwrap();
                assert!((&rec.m - &s).amax() < 1e-10);
                assert!((&rec.chi - &d).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn uncertainty_violation_is_the_failure_mode() {
        let bad = TemporalCovariance {
            dim_ops: 2,
            sigma: DMatrix::identity(2, 2) * 0.2,
            mean_early: DVector::zeros(2),
            mean_late: DVector::zeros(2),
            provenance: Provenance::Exact,
        };
        assert!(matches!(
            recover_affine_gaussian(&bad, &bad),
            Err(Error::UncertaintyViolation { .. })
        ));
        assert!(GaussianState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 0.2).is_err());
    }

    #[test]
    fn random_channels_are_physical() {
        let mut r = rng(5);
        for _ in 0..20 {
            assert!(GaussianChannelTruth::random(2, &mut r).is_physical(1e-10));
        }
        assert!(GaussianChannelTruth::lossy(1, 0.5, 0.0)
            .unwrap()
            .is_physical(1e-12));
        let amplifier_without_noise = GaussianChannelTruth::new(
            DMatrix::identity(2, 2) * 1.5,
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!(!amplifier_without_noise.is_physical(1e-10));
    }

    #[test]
    fn correlation_count_is_quadratic() {
        assert_eq!(correlation_count(1), 4);
        assert_eq!(correlation_count(3), 36);
    }
}
