//! From covariances to `(M, χ)`, the Kraus Gram matrix, and Kraus operators.

use nalgebra::{DMatrix, DVector};

use crate::basis::OperatorBasis;
use crate::channel::KrausChannel;
use crate::covariance::{
    exact_covariance, Accounting, Budget, CovarianceSampler, SamplingOptions, TemporalCovariance,
};
use crate::error::{Error, Result};
use crate::operator::{c, CMatrix, Operator, ZERO};
use crate::state::DensityState;
use crate::structure::{structure_tensors, StructureTensors};
use crate::tolerance::{EXACT_CLAMP_TOL, INVERTIBILITY_TOL};

/// Heisenberg-picture affine map `B_i ↦ Σ_j M_ij B_j + χ_i 𝟙`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineDynamics {
    pub m: DMatrix<f64>,
    pub chi: DVector<f64>,
}

impl AffineDynamics {
    /// `M_ij = Tr(Λ†(B_i) B_j)/c`, `χ_i = Tr(Λ†(B_i))/D`.
    pub fn from_channel(channel: &KrausChannel, basis: &OperatorBasis) -> Result<Self> {
        if channel.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: channel.dim(),
            });
        }
        let obs = basis.observables();
        let k = obs.len();
        let heis: Vec<Operator> = obs
            .iter()
            .map(|b| crate::channel::heisenberg_apply(channel, b))
            .collect::<Result<_>>()?;
        let m = DMatrix::from_fn(k, k, |i, j| {
            heis[i].trace_product(&obs[j]).re / basis.normalization()
        });
        let chi = DVector::from_iterator(k, heis.iter().map(|h| h.trace().re / basis.dim() as f64));
        Ok(Self { m, chi })
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }
}

/// Hermitian `U_ab = Σ_μ u*_aμ u_bμ` with `K_μ = Σ_a u_aμ B_a`, and its eigensystem.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub u: CMatrix,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns match `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl GramMatrix {
    pub fn new(u: CMatrix) -> Result<Self> {
        let dev = crate::operator::hermiticity_deviation(&u);
        if dev > 1e-10 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let herm = (&u + u.adjoint()) * c(0.5, 0.0);
        let (mut values, vectors) = Operator::from_matrix_unchecked(herm.clone()).eigh();
        let n = values.len();
        values.reverse();
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, n - 1 - j)]);
        Ok(Self {
            u: herm,
            eigenvalues: values,
            eigenvectors,
        })
    }

    /// Exact Gram matrix of a known Kraus set, `u_aμ = Tr(B_a K_μ)/c`.
    pub fn from_channel(channel: &KrausChannel, basis: &OperatorBasis) -> Result<Self> {
        let n = basis.len();
        let mut u = CMatrix::zeros(n, n);
        for k in channel.operators() {
            let coeffs = basis.coefficients(k);
            for a in 0..n {
                for b in 0..n {
                    u[(a, b)] += coeffs[a].conj() * coeffs[b];
                }
            }
        }
        Self::new(u)
    }

    pub fn trace(&self) -> f64 {
        self.u.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty Gram matrix")
    }
}

/// Smallest singular value of an equal-time covariance.
pub fn min_singular_value(cov: &TemporalCovariance) -> f64 {
    if cov.dim_ops == 0 {
        return 0.0;
    }
    cov.sigma
        .clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// True iff the smallest singular value of `σ(t₀,t₀)` exceeds `tol`.
pub fn check_invertibility(cov: &TemporalCovariance, tol: f64) -> bool {
    min_singular_value(cov) > tol
}

/// `M = σ(t,t₀) σ(t₀,t₀)⁻¹` by an LU solve of `σ(t₀,t₀)ᵀ Mᵀ = σ(t,t₀)ᵀ`.
pub fn recover_m(cov_t: &TemporalCovariance, cov_0: &TemporalCovariance) -> Result<DMatrix<f64>> {
    recover_m_with_tol(cov_t, cov_0, INVERTIBILITY_TOL)
}

pub fn recover_m_with_tol(
    cov_t: &TemporalCovariance,
    cov_0: &TemporalCovariance,
    tol: f64,
) -> Result<DMatrix<f64>> {
    if cov_t.dim_ops != cov_0.dim_ops {
        return Err(Error::DimensionMismatch {
            expected: cov_0.dim_ops,
            found: cov_t.dim_ops,
        });
    }
    let min_singular = min_singular_value(cov_0);
    if min_singular <= tol {
        return Err(Error::SingularState { min_singular, tol });
    }
    let lu = cov_0.sigma.transpose().lu();
    let mt = lu
        .solve(&cov_t.sigma.transpose())
        .ok_or(Error::SingularState { min_singular, tol })?;
    Ok(mt.transpose())
}

/// `χ = ⟨B(t)⟩ − M⟨B(t₀)⟩`.
pub fn recover_chi(
    m: &DMatrix<f64>,
    mean_early: &DVector<f64>,
    mean_late: &DVector<f64>,
) -> Result<DVector<f64>> {
    if m.ncols() != mean_early.len() || m.nrows() != mean_late.len() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            found: mean_early.len(),
        });
    }
    Ok(mean_late - m * mean_early)
}

/// `(M, χ)` from a late-time and an equal-time covariance.
pub fn recover_dynamics(
    cov_t: &TemporalCovariance,
    cov_0: &TemporalCovariance,
    tol: f64,
) -> Result<AffineDynamics> {
    let m = recover_m_with_tol(cov_t, cov_0, tol)?;
    let chi = recover_chi(&m, &cov_t.mean_early, &cov_t.mean_late)?;
    Ok(AffineDynamics { m, chi })
}

/// Heisenberg superoperator in the basis: row `i` holds the coefficients of
/// `Λ†(B_i)`, with trace preservation in row 0.
fn target_superoperator(dynamics: &AffineDynamics, dim: usize) -> DMatrix<f64> {
    let n = dynamics.len() + 1;
    let sqrt_d = (dim as f64).sqrt();
    let mut s = DMatrix::zeros(n, n);
    s[(0, 0)] = 1.0;
    for i in 1..n {
        s[(i, 0)] = sqrt_d * dynamics.chi[i - 1];
        for j in 1..n {
            s[(i, j)] = dynamics.m[(i - 1, j - 1)];
        }
    }
    s
}

/// Solves for the Gram matrix from `(M, χ)`. Uses the closed form for qubits
/// and the general exactly determined real system otherwise.
pub fn solve_gram(dynamics: &AffineDynamics, tensors: &StructureTensors) -> Result<GramMatrix> {
    if tensors.size() == 4 {
        return solve_gram_qubit(dynamics);
    }
    solve_gram_general(dynamics, tensors)
}

/// General path. With `T^{ic}_{ab} = Tr(B_a B_i B_b B_c)`, the Heisenberg map
/// gives `S_ic = Σ_ab U_ab T^{ic}_{ab}`; the `D⁴` real unknowns are `U_aa`
/// and the real and imaginary parts of `U_ab` for `a < b`.
pub fn solve_gram_general(
    dynamics: &AffineDynamics,
    tensors: &StructureTensors,
) -> Result<GramMatrix> {
    let n = tensors.size();
    if dynamics.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: dynamics.len(),
        });
    }
    let dim = (n as f64).sqrt().round() as usize;
    let expect_g000 = 2.0 / (dim as f64).sqrt();
    if (tensors.g(0, 0, 0) - expect_g000).abs() > 1e-10 {
        return Err(Error::InvalidArgument(
            "Gram solve needs an orthonormal basis with B0 = 1/sqrt(D)".into(),
        ));
    }
    let target = target_superoperator(dynamics, dim);

    // products P_abk with B_a B_b = Σ_k P_abk B_k
    let prod = |a: usize, b: usize, k: usize| tensors.product(a, b, k);
    let mut coef = vec![ZERO; n * n * n * n]; // [(i*n + c)*n*n + a*n + b]
    for i in 0..n {
        for a in 0..n {
            for d in 0..n {
                let p_aid = prod(a, i, d);
                if p_aid == ZERO {
                    continue;
                }
                for b in 0..n {
                    for cc in 0..n {
                        let p = prod(d, b, cc);
                        if p != ZERO {
                            coef[(i * n + cc) * n * n + a * n + b] += p_aid * p;
                        }
                    }
                }
            }
        }
    }

    let unknowns = n * n;
    let mut columns: Vec<(usize, usize, bool)> = Vec::with_capacity(unknowns);
    for a in 0..n {
        columns.push((a, a, false));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            columns.push((a, b, false));
            columns.push((a, b, true));
        }
    }
    let mut sys = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<f64>::zeros(unknowns);
    for i in 0..n {
        for cc in 0..n {
            let row = i * n + cc;
            rhs[row] = target[(i, cc)];
            let base = (i * n + cc) * n * n;
            for (col, &(a, b, imag)) in columns.iter().enumerate() {
                let t = coef[base + a * n + b];
                sys[(row, col)] = if a == b {
                    t.re
                } else if imag {
                    -2.0 * t.im
                } else {
                    2.0 * t.re
                };
            }
        }
    }
    let x = sys
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::RankDeficient { residual: f64::NAN })?;
    let residual = (&sys * &x - &rhs).amax();
    if !residual.is_finite() || residual > 1e-8 * (1.0 + rhs.amax()) {
        return Err(Error::RankDeficient { residual });
    }
    let mut u = CMatrix::zeros(n, n);
    for (col, &(a, b, imag)) in columns.iter().enumerate() {
        if a == b {
            u[(a, a)] = c(x[col], 0.0);
        } else if imag {
            u[(a, b)].im = x[col];
            u[(b, a)].im = -x[col];
        } else {
            u[(a, b)].re = x[col];
            u[(b, a)].re = x[col];
        }
    }
    GramMatrix::new(u)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (2, 1, 0) | (0, 2, 1) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Closed-form qubit Gram matrix in the scaled Pauli basis (indices 1..3 are
/// `x, y, z`):
///
/// - `U₀₀ = (1 + Tr M)/2`
/// - `U₀ₖ = χ_k/√2 + (i/4) ε_kij (M_ij − M_ji)`
/// - `U_kl = (M_kl + M_lk)/2 + δ_kl (1 − Tr M)/2 + (i/√2) ε_klm χ_m`
pub fn solve_gram_qubit(dynamics: &AffineDynamics) -> Result<GramMatrix> {
    if dynamics.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: dynamics.len(),
        });
    }
    let m = &dynamics.m;
    let chi = &dynamics.chi;
    let tr = m.trace();
    let r2 = std::f64::consts::SQRT_2;
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = c((1.0 + tr) / 2.0, 0.0);
    for k in 0..3 {
        let mut im = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                im += 0.25 * levi_civita(k, i, j) * (m[(i, j)] - m[(j, i)]);
            }
        }
        u[(0, k + 1)] = c(chi[k] / r2, im);
        u[(k + 1, 0)] = u[(0, k + 1)].conj();
        for l in 0..3 {
            let re = (m[(k, l)] + m[(l, k)]) / 2.0 + if k == l { (1.0 - tr) / 2.0 } else { 0.0 };
            let im: f64 = (0..3).map(|q| levi_civita(k, l, q) * chi[q] / r2).sum();
            u[(k + 1, l + 1)] = c(re, im);
        }
    }
    GramMatrix::new(u)
}

/// Minimal Kraus set from the Gram eigensystem: `K_μ = √λ_μ Σ_a v̄_{aμ} B_a`.
/// Negative eigenvalues above `-clamp_tol` are dropped; below it the dynamics
/// are not completely positive.
pub fn kraus_from_gram(
    gram: &GramMatrix,
    basis: &OperatorBasis,
    clamp_tol: f64,
) -> Result<KrausChannel> {
    let n = basis.len();
    if gram.u.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: gram.u.nrows(),
        });
    }
    let lam_min = gram.min_eigenvalue();
    if lam_min < -clamp_tol {
        return Err(Error::NotCompletelyPositive {
            eigenvalue: lam_min,
            tol: clamp_tol,
        });
    }
    let cutoff = 1e-14 * gram.eigenvalues[0].abs().max(1.0);
    let mut ops = Vec::new();
    for (mu, &lam) in gram.eigenvalues.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        let s = lam.sqrt();
        let coeffs: Vec<_> = (0..n)
            .map(|a| gram.eigenvectors[(a, mu)].conj() * s)
            .collect();
        ops.push(basis.compose(&coeffs));
    }
    if ops.is_empty() {
        return Err(Error::NotCompletelyPositive {
            eigenvalue: lam_min,
            tol: clamp_tol,
        });
    }
    KrausChannel::new(ops)
}

/// Informationally complete probe states `|j⟩`, `(|j⟩+|k⟩)/√2`, `(|j⟩+i|k⟩)/√2`.
pub fn probe_states(dim: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(dim * dim);
    let ket = |amps: &[(usize, num_complex::Complex64)]| {
        let mut v = nalgebra::DVector::from_element(dim, ZERO);
        for &(i, a) in amps {
            v[i] = a;
        }
        let norm = v.norm();
        let v = v / c(norm, 0.0);
        &v * v.adjoint()
    };
    for j in 0..dim {
        out.push(ket(&[(j, c(1.0, 0.0))]));
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            out.push(ket(&[(j, c(1.0, 0.0)), (k, c(1.0, 0.0))]));
            out.push(ket(&[(j, c(1.0, 0.0)), (k, c(0.0, 1.0))]));
        }
    }
    out
}

/// Largest operator-norm difference of the two channels' outputs over
/// [`probe_states`]. Compares action, never Kraus elements.
pub fn action_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    let mut worst = 0.0_f64;
    for rho in probe_states(a.dim()) {
        let diff = a.apply_matrix(&rho)? - b.apply_matrix(&rho)?;
        worst = worst.max(Operator::from_matrix_unchecked(diff).norm());
    }
    Ok(worst)
}

/// Spectral norm of a real matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

/// Data source for [`reconstruct_channel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    Sampled {
        budget: Budget,
        seed: u64,
        options: SamplingOptions,
    },
}

/// Tolerances for the pipeline; defaults depend on the mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineTolerances {
    pub invertibility: f64,
    pub clamp: f64,
}

impl PipelineTolerances {
    /// Exact data: `1e-8` for both. Sampled: `δ` for invertibility and `10δ` for clamping.
    pub fn for_mode(mode: &Mode) -> Self {
        match mode {
            Mode::Exact => Self {
                invertibility: INVERTIBILITY_TOL,
                clamp: EXACT_CLAMP_TOL,
            },
            Mode::Sampled { budget, .. } => Self {
                invertibility: budget.delta.max(INVERTIBILITY_TOL),
                clamp: 10.0 * budget.delta,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub min_singular_value: f64,
    pub gram_eigenvalues: Vec<f64>,
    /// Negative eigenvalues dropped by the clamp.
    pub clamped: usize,
    pub completeness_defect: f64,
    pub kraus_rank: usize,
    /// `‖M_est − M_true‖` (spectral) when the truth is known.
    pub delta_m: Option<f64>,
    pub delta_m_max: Option<f64>,
    pub delta_chi: Option<f64>,
    pub action_error: Option<f64>,
    pub accounting: Option<Accounting>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub dynamics: AffineDynamics,
    pub gram: GramMatrix,
    pub kraus: KrausChannel,
    pub diagnostics: Diagnostics,
}

/// Covariances in, channel out.
pub fn reconstruct_from_covariances(
    cov_t: &TemporalCovariance,
    cov_0: &TemporalCovariance,
    basis: &OperatorBasis,
    tensors: &StructureTensors,
    tol: PipelineTolerances,
) -> Result<Reconstruction> {
    let dynamics = recover_dynamics(cov_t, cov_0, tol.invertibility)?;
    let gram = solve_gram(&dynamics, tensors)?;
    let kraus = kraus_from_gram(&gram, basis, tol.clamp)?;
    let diagnostics = Diagnostics {
        min_singular_value: min_singular_value(cov_0),
        clamped: gram.eigenvalues.iter().filter(|&&l| l < 0.0).count(),
        gram_eigenvalues: gram.eigenvalues.clone(),
        completeness_defect: kraus.completeness_defect(),
        kraus_rank: kraus.operators().len(),
        delta_m: None,
        delta_m_max: None,
        delta_chi: None,
        action_error: None,
        accounting: None,
    };
    Ok(Reconstruction {
        dynamics,
        gram,
        kraus,
        diagnostics,
    })
}

/// End-to-end pipeline: simulate the data for `channel` on `state`, then
/// reconstruct and compare with the truth.
pub fn reconstruct_channel(
    state: &DensityState,
    channel: &KrausChannel,
    basis: &OperatorBasis,
    mode: Mode,
) -> Result<Reconstruction> {
    reconstruct_channel_with(
        state,
        channel,
        basis,
        mode,
        PipelineTolerances::for_mode(&mode),
    )
}

pub fn reconstruct_channel_with(
    state: &DensityState,
    channel: &KrausChannel,
    basis: &OperatorBasis,
    mode: Mode,
    tol: PipelineTolerances,
) -> Result<Reconstruction> {
    let tensors = structure_tensors(basis);
    let (cov_t, cov_0, accounting) = match mode {
        Mode::Exact => (
            exact_covariance(state, channel, basis)?,
            exact_covariance(state, &KrausChannel::identity(state.dim()), basis)?,
            None,
        ),
        Mode::Sampled {
            budget,
            seed,
            options,
        } => {
            let mut s =
                CovarianceSampler::new(state, channel, basis, budget.epsilon, seed, options)?;
            s.advance(budget.trials, budget.mean_trials);
            (
                s.estimate(),
                s.equal_time(&tensors, basis.dim())?,
                Some(Accounting::new(basis.dim(), &budget, options.scheme)),
            )
        }
    };
    let mut rec = reconstruct_from_covariances(&cov_t, &cov_0, basis, &tensors, tol)?;
    let truth = AffineDynamics::from_channel(channel, basis)?;
    let dm = &rec.dynamics.m - &truth.m;
    rec.diagnostics.delta_m = Some(spectral_norm(&dm));
    rec.diagnostics.delta_m_max = Some(dm.amax());
    rec.diagnostics.delta_chi = Some((&rec.dynamics.chi - &truth.chi).amax());
    rec.diagnostics.action_error = Some(action_distance(&rec.kraus, channel)?);
    rec.diagnostics.accounting = accounting;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gell_mann_basis, pauli_basis};
    use crate::covariance::Provenance;
    use crate::operator::ONE;
    use rand::SeedableRng;

    fn cov(sigma: DMatrix<f64>) -> TemporalCovariance {
        let k = sigma.nrows();
        TemporalCovariance {
            dim_ops: k,
            sigma,
            mean_early: DVector::zeros(k),
            mean_late: DVector::zeros(k),
            provenance: Provenance::Exact,
        }
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    #[test]
    fn recover_m_identity_and_phase_damping() {
        let s0 = cov(DMatrix::identity(3, 3));
        assert!((recover_m(&s0, &s0).unwrap() - DMatrix::identity(3, 3)).amax() < 1e-15);
        let st = cov(diag(&[0.5, 0.5, 1.0]));
        assert!((recover_m(&st, &s0).unwrap() - diag(&[0.5, 0.5, 1.0])).amax() < 1e-15);
    }

    #[test]
    fn singular_equal_time_covariance_is_rejected() {
        let up = DensityState::pure(&[ONE, ZERO]).unwrap();
        let id = KrausChannel::identity(2);
        let c0 = exact_covariance(&up, &id, &pauli_basis()).unwrap();
        assert!(!check_invertibility(&c0, 1e-8));
        assert!(matches!(
            recover_m(&c0, &c0),
            Err(Error::SingularState { .. })
        ));
        let mixed =
            exact_covariance(&DensityState::maximally_mixed(2), &id, &pauli_basis()).unwrap();
        assert!(check_invertibility(&mixed, 1e-8));
    }

    #[test]
    fn unitary_gives_orthogonal_m() {
        let ch = KrausChannel::rotation([1.0, 2.0, -0.5], 0.9).unwrap();
        let rho = DensityState::maximally_mixed(2);
        let ct = exact_covariance(&rho, &ch, &pauli_basis()).unwrap();
        let c0 = exact_covariance(&rho, &KrausChannel::identity(2), &pauli_basis()).unwrap();
        let m = recover_m(&ct, &c0).unwrap();
        assert!((m.transpose() * &m - DMatrix::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn amplitude_damping_chi() {
        let g = 0.5;
        let ch = KrausChannel::amplitude_damping(g).unwrap();
        let dynamics = AffineDynamics::from_channel(&ch, &pauli_basis()).unwrap();
        assert!(dynamics.chi[0].abs() < 1e-15 && dynamics.chi[1].abs() < 1e-15);
        assert!((dynamics.chi[2] - g / std::f64::consts::SQRT_2).abs() < 1e-15);
        let rho = DensityState::maximally_mixed(2);
        let rec = reconstruct_channel(&rho, &ch, &pauli_basis(), Mode::Exact).unwrap();
        assert!((&rec.dynamics.chi - &dynamics.chi).amax() < 1e-12);
        let pd = KrausChannel::phase_damping(0.5).unwrap();
        let rec = reconstruct_channel(&rho, &pd, &pauli_basis(), Mode::Exact).unwrap();
        assert!(rec.dynamics.chi.amax() < 1e-14);
    }

    #[test]
    fn identity_gram_is_rank_one() {
        let id = AffineDynamics {
            m: DMatrix::identity(3, 3),
            chi: DVector::zeros(3),
        };
        let g = solve_gram_qubit(&id).unwrap();
        assert!((g.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(g.eigenvalues[1..].iter().all(|l| l.abs() < 1e-14));
        assert!((g.eigenvectors[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let k = kraus_from_gram(&g, &pauli_basis(), 1e-8).unwrap();
        assert_eq!(k.operators().len(), 1);
        let op = k.operators()[0].matrix();
        let phase = op[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        let unphased = op * phase.conj();
        assert!((unphased - CMatrix::identity(2, 2)).camax() < 1e-14);
    }

    #[test]
    fn phase_damping_gram_and_round_trip() {
        let truth = KrausChannel::phase_damping(0.5).unwrap();
        let dynamics = AffineDynamics::from_channel(&truth, &pauli_basis()).unwrap();
        let g = solve_gram_qubit(&dynamics).unwrap();
        let nonzero: Vec<usize> = (0..4).filter(|&m| g.eigenvalues[m] > 1e-12).collect();
        assert_eq!(nonzero.len(), 2);
        for &mu in &nonzero {
            let v = g.eigenvectors.column(mu);
            assert!(v[1].norm() < 1e-12 && v[2].norm() < 1e-12);
        }
        let k = kraus_from_gram(&g, &pauli_basis(), 1e-8).unwrap();
        assert_eq!(k.operators().len(), 2);
        for b in pauli_basis().elements() {
            let got = k.apply_matrix(b.matrix()).unwrap();
            let want = truth.apply_matrix(b.matrix()).unwrap();
            assert!((got - want).camax() < 1e-10);
        }
    }

    #[test]
    fn qubit_closed_form_matches_general_solver() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let basis = pauli_basis();
        let t = structure_tensors(&basis);
        for _ in 0..25 {
            let ch = KrausChannel::random(2, &mut rng);
            let dynamics = AffineDynamics::from_channel(&ch, &basis).unwrap();
            let fast = solve_gram_qubit(&dynamics).unwrap();
            let general = solve_gram_general(&dynamics, &t).unwrap();
            let oracle = GramMatrix::from_channel(&ch, &basis).unwrap();
            assert!((&fast.u - &general.u).camax() < 1e-12);
            assert!((&fast.u - &oracle.u).camax() < 1e-12);
            assert!((fast.trace() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn general_solver_round_trips_qutrits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let basis = gell_mann_basis(3).unwrap();
        let t = structure_tensors(&basis);
        for _ in 0..3 {
            let ch = KrausChannel::random(3, &mut rng);
            let dynamics = AffineDynamics::from_channel(&ch, &basis).unwrap();
            let g = solve_gram_general(&dynamics, &t).unwrap();
            let oracle = GramMatrix::from_channel(&ch, &basis).unwrap();
            assert!((&g.u - &oracle.u).camax() < 1e-10);
            assert!(g.min_eigenvalue() > -1e-10);
            let k = kraus_from_gram(&g, &basis, 1e-8).unwrap();
            assert!(action_distance(&k, &ch).unwrap() < 1e-9);
            assert!(k.completeness_defect() < 1e-9);
        }
    }

    #[test]
    fn clamping_policy() {
        let truth = KrausChannel::phase_damping(0.5).unwrap();
        let g = GramMatrix::from_channel(&truth, &pauli_basis()).unwrap();
        // push the zero eigenvalue slightly negative along its eigenvector
        let zero_mode = 3;
        let v = g.eigenvectors.column(zero_mode).into_owned();
        let shifted = |eps: f64| GramMatrix::new(&g.u - &v * v.adjoint() * c(eps, 0.0)).unwrap();
        let ok = kraus_from_gram(&shifted(5e-12), &pauli_basis(), 1e-8).unwrap();
        assert!(ok.completeness_defect() <= 1e-10);
        let err = kraus_from_gram(&shifted(1e-3), &pauli_basis(), 1e-8);
        assert!(matches!(err, Err(Error::NotCompletelyPositive { .. })));
    }

    #[test]
    fn exact_pipeline_random_channels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let ch = KrausChannel::random(2, &mut rng);
            let rho = DensityState::random_full_rank(2, 0.05, &mut rng);
            let rec = reconstruct_channel(&rho, &ch, &pauli_basis(), Mode::Exact).unwrap();
            assert!(rec.diagnostics.action_error.unwrap() < 1e-8);
            assert!(rec.diagnostics.completeness_defect < 1e-8);
            assert!(rec.diagnostics.delta_m.unwrap() < 1e-8);
        }
    }

    #[test]
    fn covariance_evolution_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        for d in [2, 3] {
            let basis = gell_mann_basis(d).unwrap();
            let ch = KrausChannel::random(d, &mut rng);
            let rho = DensityState::random_full_rank(d, 0.05, &mut rng);
            let truth = AffineDynamics::from_channel(&ch, &basis).unwrap();
            let ct = exact_covariance(&rho, &ch, &basis).unwrap();
            let c0 = exact_covariance(&rho, &KrausChannel::identity(d), &basis).unwrap();
            assert!((&ct.sigma - &truth.m * &c0.sigma).amax() < 1e-10);
        }
    }

    #[test]
    fn singular_state_stops_pipeline() {
        let up = DensityState::pure(&[ONE, ZERO]).unwrap();
        let pd = KrausChannel::phase_damping(0.5).unwrap();
        let r = reconstruct_channel(&up, &pd, &pauli_basis(), Mode::Exact);
        assert!(matches!(r, Err(Error::SingularState { .. })));
    }
}
