//! Two-time covariance matrices, exact and sampled, with the trial budget.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::basis::OperatorBasis;
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::random::derive_seed;
use crate::state::DensityState;
use crate::structure::StructureTensors;
use crate::weak::pointer::PointerConfig;
use crate::weak::sampling::TrialSampler;
use crate::weak::single_pointer::{single_pointer_p_plus, Configuration};
use crate::weak::systematic::{systematic_bound, systematic_f};
use crate::weak::two_pointer::{run_two_pointer, ProtocolRun};

/// Which pointer protocol produced the correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    TwoPointer,
    SinglePointer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Exact,
    Sampled {
        trials: u64,
        mean_trials: u64,
        epsilon: f64,
        seed: u64,
        scheme: Scheme,
        corrected: bool,
    },
}

/// `σ(t,t₀)` with rows indexed by the late observable and columns by the
/// early one, so that `σ(t,t₀) = M σ(t₀,t₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalCovariance {
    pub dim_ops: usize,
    pub sigma: DMatrix<f64>,
    pub mean_early: DVector<f64>,
    pub mean_late: DVector<f64>,
    pub provenance: Provenance,
}

impl TemporalCovariance {
    pub fn asymmetry(&self) -> f64 {
        (&self.sigma - self.sigma.transpose()).amax()
    }
}

/// Target error `δ`, coupling `ε` and trials per correlation `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub delta: f64,
    pub epsilon: f64,
    pub trials: u64,
    /// Projective trials per mean value; defaults to `trials`.
    pub mean_trials: u64,
}

impl Budget {
    pub fn new(delta: f64, epsilon: f64, trials: u64) -> Result<Self> {
        if !(delta > 0.0) || trials == 0 {
            return Err(Error::InvalidArgument(format!(
                "budget needs delta > 0 and N >= 1 (delta = {delta}, N = {trials})"
            )));
        }
        PointerConfig::new(epsilon)?;
        Ok(Self {
            delta,
            epsilon,
            trials,
            mean_trials: trials,
        })
    }

    /// Budget at fixed `ε² ` and `N`, with `δ` set to the statistical error `2/(ε²√N)`.
    pub fn from_eps2(eps2: f64, trials: u64) -> Result<Self> {
        let delta = 2.0 / (eps2 * (trials.max(1) as f64).sqrt());
        Self::new(delta, eps2.sqrt(), trials)
    }

    /// Optimal `ε` and `N` for target `δ` under a systematic term of size `f_abs`.
    pub fn optimal(delta: f64, f_abs: f64) -> Result<Self> {
        Self::new(
            delta,
            optimal_epsilon(delta, f_abs)?,
            required_trials(delta, f_abs)?,
        )
    }

    pub fn with_mean_trials(mut self, mean_trials: u64) -> Result<Self> {
        if mean_trials == 0 {
            return Err(Error::InvalidArgument("mean trials must be >= 1".into()));
        }
        self.mean_trials = mean_trials;
        Ok(self)
    }
}

fn check_budget_inputs(delta: f64, f_abs: f64) -> Result<()> {
    if !(delta > 0.0) || !(f_abs > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta and |f| must be positive (delta = {delta}, |f| = {f_abs})"
        )));
    }
    Ok(())
}

/// `ε = √(δ/|f|)`, balancing the `ε²|f|` bias against statistical noise.
pub fn optimal_epsilon(delta: f64, f_abs: f64) -> Result<f64> {
    check_budget_inputs(delta, f_abs)?;
    let eps = (delta / f_abs).sqrt();
    if eps >= 1.0 {
        warn!("optimal coupling eps = {eps:.3} >= 1 leaves the weak regime");
    }
    if delta > 0.5 * f_abs {
        warn!("delta = {delta:.3e} is not small against the systematic scale {f_abs:.3e}");
    }
    Ok(eps)
}

/// `N = ⌈4 f² / δ⁴⌉`.
pub fn required_trials(delta: f64, f_abs: f64) -> Result<u64> {
    check_budget_inputs(delta, f_abs)?;
    Ok(ceil_count(4.0 * f_abs * f_abs / delta.powi(4)))
}

/// `⌈(4/9)‖B‖⁸/δ⁴⌉`, the trial count at the basis-level bound on `|f|`.
pub fn trials_bound(delta: f64, norm: f64) -> Result<u64> {
    required_trials(delta, systematic_bound(norm))
}

fn ceil_count(x: f64) -> u64 {
    // guard against 277.99999999999997-style round-off before the ceiling
    let r = x.round();
    if (x - r).abs() < 1e-9 * x.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Experiments consumed by one channel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accounting {
    pub correlation_experiments: u64,
    pub mean_experiments: u64,
    pub trials_per_correlation: u64,
    pub mean_trials: u64,
    /// Pointer ensembles per correlation (1 for two pointers, 2 for one).
    pub ensembles_per_correlation: u64,
}

impl Accounting {
    pub fn new(dim: usize, budget: &Budget, scheme: Scheme) -> Self {
        let k = (dim * dim - 1) as u64;
        Self {
            correlation_experiments: k * k,
            mean_experiments: 2 * k,
            trials_per_correlation: budget.trials,
            mean_trials: budget.mean_trials,
            ensembles_per_correlation: match scheme {
                Scheme::TwoPointer => 1,
                Scheme::SinglePointer => 2,
            },
        }
    }

    pub fn correlation_trials(&self) -> u64 {
        self.correlation_experiments * self.trials_per_correlation * self.ensembles_per_correlation
    }

    pub fn total_trials(&self) -> u64 {
        self.correlation_trials() + self.mean_experiments * self.mean_trials
    }
}

fn check_dims(state: &DensityState, channel: &KrausChannel, basis: &OperatorBasis) -> Result<()> {
    let d = state.dim();
    for found in [channel.dim(), basis.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    Ok(())
}

/// Trace-formula covariance `σ_ji = Tr ρ{B_i, B_j(t)} − 2⟨B_i⟩⟨B_j(t)⟩`.
pub fn exact_covariance(
    state: &DensityState,
    channel: &KrausChannel,
    basis: &OperatorBasis,
) -> Result<TemporalCovariance> {
    check_dims(state, channel, basis)?;
    let obs = basis.observables();
    let k = obs.len();
    let late: Vec<_> = obs
        .iter()
        .map(|b| crate::channel::heisenberg_apply(channel, b))
        .collect::<Result<_>>()?;
    let mean_early = DVector::from_iterator(k, obs.iter().map(|b| state.expectation(b)));
    let mean_late = DVector::from_iterator(k, late.iter().map(|b| state.expectation(b)));
    let sigma = DMatrix::from_fn(k, k, |j, i| {
        state.expectation(&obs[i].anticommutator(&late[j])) - 2.0 * mean_early[i] * mean_late[j]
    });
    Ok(TemporalCovariance {
        dim_ops: k,
        sigma,
        mean_early,
        mean_late,
        provenance: Provenance::Exact,
    })
}

/// Equal-time covariance rebuilt from single-time means alone, using
/// `Tr ρ{B_i,B_j} = Σ_c g_ijc ⟨B_c⟩` with `⟨B₀⟩ = 1/√D`.
pub fn equal_time_from_means(
    tensors: &StructureTensors,
    dim: usize,
    means: &DVector<f64>,
    provenance: Provenance,
) -> Result<TemporalCovariance> {
    let k = means.len();
    if tensors.size() != k + 1 || k + 1 != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: tensors.size(),
            found: k + 1,
        });
    }
    let full: Vec<f64> = std::iter::once(1.0 / (dim as f64).sqrt())
        .chain(means.iter().copied())
        .collect();
    let sigma = DMatrix::from_fn(k, k, |j, i| {
        let anti: f64 = full
            .iter()
            .enumerate()
            .map(|(c, m)| tensors.g(i + 1, j + 1, c) * m)
            .sum();
        anti - 2.0 * means[i] * means[j]
    });
    Ok(TemporalCovariance {
        dim_ops: k,
        sigma,
        mean_early: means.clone(),
        mean_late: means.clone(),
        provenance,
    })
}

/// Options for [`sampled_covariance_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub scheme: Scheme,
    /// Subtract the known `ε⁴ f` bias (two-pointer only, needs the channel oracle).
    pub correct: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::TwoPointer,
            correct: false,
        }
    }
}

const TAG_CORRELATION: u64 = 0xC0;
const TAG_MEAN_EARLY: u64 = 0xE0;
const TAG_MEAN_LATE: u64 = 0xE1;

/// `P(+1)` of each pointer ensemble behind one correlation.
#[derive(Debug, Clone)]
struct CorrelationCell {
    p_plus: Vec<f64>,
    correction: f64,
    sampler: TrialSampler,
    sums: Vec<i64>,
}

#[derive(Debug, Clone)]
struct MeanCell {
    rho: crate::operator::CMatrix,
    obs: crate::operator::Operator,
    sampler: TrialSampler,
    sum: f64,
}

/// Incremental Monte-Carlo estimator of `σ(t,t₀)` and both mean vectors.
///
/// Trials are accumulated as binomial counts per experiment; every experiment
/// owns an RNG stream derived from `(seed, experiment tag)`, so results do
/// not depend on evaluation order.
#[derive(Debug, Clone)]
pub struct CovarianceSampler {
    k: usize,
    epsilon: f64,
    seed: u64,
    options: SamplingOptions,
    cells: Vec<CorrelationCell>,
    early: Vec<MeanCell>,
    late: Vec<MeanCell>,
    trials: u64,
    mean_trials: u64,
}

impl CovarianceSampler {
    pub fn new(
        state: &DensityState,
        channel: &KrausChannel,
        basis: &OperatorBasis,
        epsilon: f64,
        seed: u64,
        options: SamplingOptions,
    ) -> Result<Self> {
        check_dims(state, channel, basis)?;
        if options.correct && options.scheme == Scheme::SinglePointer {
            return Err(Error::InvalidArgument(
                "systematic correction is only defined for the two-pointer scheme".into(),
            ));
        }
        let config = PointerConfig::new(epsilon)?;
        let obs = basis.observables();
        let k = obs.len();
        let mut cells = Vec::with_capacity(k * k);
        for j in 0..k {
            for i in 0..k {
                let run = ProtocolRun::new(
                    channel.clone(),
                    obs[i].clone(),
                    obs[j].clone(),
                    state.clone(),
                    config,
                )?;
                let p_plus = match options.scheme {
                    Scheme::TwoPointer => vec![run_two_pointer(&run)?.p_product_plus()],
                    Scheme::SinglePointer => Configuration::BOTH
                        .iter()
                        .map(|&c| single_pointer_p_plus(&run, c))
                        .collect::<Result<_>>()?,
                };
                let correction = if options.correct {
                    2.0 * config.eps2() * systematic_f(&run)
                } else {
                    0.0
                };
                let n = p_plus.len();
                cells.push(CorrelationCell {
                    p_plus,
                    correction,
                    sampler: TrialSampler::new(derive_seed(
                        seed,
                        &[TAG_CORRELATION, j as u64, i as u64],
                    )),
                    sums: vec![0; n],
                });
            }
        }
        let evolved = channel.apply_matrix(state.matrix())?;
        let mean_cells = |rho: &crate::operator::CMatrix, tag: u64| -> Vec<MeanCell> {
            obs.iter()
                .enumerate()
                .map(|(i, b)| MeanCell {
                    rho: rho.clone(),
                    obs: b.clone(),
                    sampler: TrialSampler::new(derive_seed(seed, &[tag, i as u64])),
                    sum: 0.0,
                })
                .collect()
        };
        Ok(Self {
            k,
            epsilon,
            seed,
            options,
            cells,
            early: mean_cells(state.matrix(), TAG_MEAN_EARLY),
            late: mean_cells(&evolved, TAG_MEAN_LATE),
            trials: 0,
            mean_trials: 0,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Same experiments with fresh RNG streams for `seed` and no accumulated trials.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.seed = seed;
        out.trials = 0;
        out.mean_trials = 0;
        let k = self.k as u64;
        for (n, cell) in out.cells.iter_mut().enumerate() {
            let (j, i) = (n as u64 / k, n as u64 % k);
            cell.sampler = TrialSampler::new(derive_seed(seed, &[TAG_CORRELATION, j, i]));
            cell.sums.iter_mut().for_each(|s| *s = 0);
        }
        for (tag, cells) in [
            (TAG_MEAN_EARLY, &mut out.early),
            (TAG_MEAN_LATE, &mut out.late),
        ] {
            for (i, cell) in cells.iter_mut().enumerate() {
                cell.sampler = TrialSampler::new(derive_seed(seed, &[tag, i as u64]));
                cell.sum = 0.0;
            }
        }
        out
    }

    /// The `N → ∞` limit of [`CovarianceSampler::estimate`]: exact outcome
    /// probabilities and exact means, so only the finite-`ε` bias remains.
    pub fn expected_estimate(&self) -> TemporalCovariance {
        let k = self.k;
        let exact = |cells: &[MeanCell]| {
            DVector::from_iterator(
                k,
                cells.iter().map(|c| (&c.rho * c.obs.matrix()).trace().re),
            )
        };
        let mean_early = exact(&self.early);
        let mean_late = exact(&self.late);
        let eps2 = self.epsilon * self.epsilon;
        let sigma = DMatrix::from_fn(k, k, |j, i| {
            let cell = &self.cells[j * k + i];
            let e: Vec<f64> = cell.p_plus.iter().map(|p| 2.0 * p - 1.0).collect();
            let anti = match self.options.scheme {
                Scheme::TwoPointer => 2.0 * e[0] / eps2,
                Scheme::SinglePointer => (e[0] + e[1]) / (2.0 * eps2),
            };
            anti - cell.correction - 2.0 * mean_early[i] * mean_late[j]
        });
        TemporalCovariance {
            dim_ops: k,
            sigma,
            mean_early,
            mean_late,
            provenance: Provenance::Exact,
        }
    }

    /// Exact equal-time covariance, pairing with [`CovarianceSampler::expected_estimate`].
    pub fn expected_equal_time(
        &self,
        tensors: &StructureTensors,
        dim: usize,
    ) -> Result<TemporalCovariance> {
        let est = self.expected_estimate();
        equal_time_from_means(tensors, dim, &est.mean_early, Provenance::Exact)
    }

    /// Adds `trials` more runs to every correlation and `mean_trials` to every mean.
    pub fn advance(&mut self, trials: u64, mean_trials: u64) {
        for cell in &mut self.cells {
            for (s, &p) in cell.sums.iter_mut().zip(cell.p_plus.iter()) {
                *s += cell.sampler.pm_sum(p, trials);
            }
        }
        for cell in self.early.iter_mut().chain(self.late.iter_mut()) {
            if mean_trials > 0 {
                let m = cell
                    .sampler
                    .projective_mean(&cell.rho, &cell.obs, mean_trials);
                cell.sum += m * mean_trials as f64;
            }
        }
        self.trials += trials;
        self.mean_trials += mean_trials;
    }

    fn provenance(&self) -> Provenance {
        Provenance::Sampled {
            trials: self.trials,
            mean_trials: self.mean_trials,
            epsilon: self.epsilon,
            seed: self.seed,
            scheme: self.options.scheme,
            corrected: self.options.correct,
        }
    }

    /// Current estimate, `σ̂_ji = (2/ε²)·mean(s₁s₂) − 2⟨B̂_i⟩⟨B̂_j(t)⟩` (two pointers)
    /// or `(Ê₁+Ê₂)/(2ε²) − 2⟨B̂_i⟩⟨B̂_j(t)⟩` (one pointer).
    pub fn estimate(&self) -> TemporalCovariance {
        let k = self.k;
        let mean = |cells: &[MeanCell]| {
            DVector::from_iterator(
                k,
                cells.iter().map(|c| c.sum / self.mean_trials.max(1) as f64),
            )
        };
        let mean_early = mean(&self.early);
        let mean_late = mean(&self.late);
        let eps2 = self.epsilon * self.epsilon;
        let n = self.trials.max(1) as f64;
        let sigma = DMatrix::from_fn(k, k, |j, i| {
            let cell = &self.cells[j * k + i];
            let anti = match self.options.scheme {
                Scheme::TwoPointer => 2.0 * cell.sums[0] as f64 / n / eps2,
                Scheme::SinglePointer => (cell.sums[0] + cell.sums[1]) as f64 / n / (2.0 * eps2),
            };
            anti - cell.correction - 2.0 * mean_early[i] * mean_late[j]
        });
        TemporalCovariance {
            dim_ops: k,
            sigma,
            mean_early,
            mean_late,
            provenance: self.provenance(),
        }
    }

    /// Equal-time covariance from the current early-time means.
    pub fn equal_time(&self, tensors: &StructureTensors, dim: usize) -> Result<TemporalCovariance> {
        let est = self.estimate();
        equal_time_from_means(tensors, dim, &est.mean_early, self.provenance())
    }
}

/// Sampled two-pointer covariance with default options.
pub fn sampled_covariance(
    state: &DensityState,
    channel: &KrausChannel,
    basis: &OperatorBasis,
    budget: &Budget,
    seed: u64,
) -> Result<TemporalCovariance> {
    sampled_covariance_with(
        state,
        channel,
        basis,
        budget,
        seed,
        SamplingOptions::default(),
    )
}

pub fn sampled_covariance_with(
    state: &DensityState,
    channel: &KrausChannel,
    basis: &OperatorBasis,
    budget: &Budget,
    seed: u64,
    options: SamplingOptions,
) -> Result<TemporalCovariance> {
    let mut s = CovarianceSampler::new(state, channel, basis, budget.epsilon, seed, options)?;
    s.advance(budget.trials, budget.mean_trials);
    Ok(s.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gell_mann_basis, pauli_basis};
    use crate::operator::{ONE, ZERO};
    use crate::structure::structure_tensors;
    use rand::SeedableRng;

    fn pd() -> KrausChannel {
        KrausChannel::phase_damping(0.5).unwrap()
    }

    #[test]
    fn maximally_mixed_identity_is_unit_matrix() {
        let cov = exact_covariance(
            &DensityState::maximally_mixed(2),
            &KrausChannel::identity(2),
            &pauli_basis(),
        )
        .unwrap();
        assert!((cov.sigma - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn phase_damping_covariance() {
        let cov =
            exact_covariance(&DensityState::maximally_mixed(2), &pd(), &pauli_basis()).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, 1.0]));
        assert!((cov.sigma - want).amax() < 1e-14);
        assert!(cov.mean_early.amax() < 1e-15 && cov.mean_late.amax() < 1e-15);
    }

    #[test]
    fn sharp_observable_row_vanishes() {
        let up = DensityState::pure(&[ONE, ZERO]).unwrap();
        let cov = exact_covariance(&up, &KrausChannel::identity(2), &pauli_basis()).unwrap();
        for i in 0..3 {
            assert!(cov.sigma[(2, i)].abs() < 1e-14);
            assert!(cov.sigma[(i, 2)].abs() < 1e-14);
        }
    }

    #[test]
    fn equal_time_is_symmetric_psd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for d in [2, 3] {
            let basis = gell_mann_basis(d).unwrap();
            for _ in 0..10 {
                let rho = DensityState::random_full_rank(d, 0.0, &mut rng);
                let cov = exact_covariance(&rho, &KrausChannel::identity(d), &basis).unwrap();
                assert!(cov.asymmetry() < 1e-12);
                let eig = cov.sigma.clone().symmetric_eigen().eigenvalues;
                assert!(eig.min() > -1e-10);
            }
        }
    }

    #[test]
    fn means_formula_matches_trace_formula() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3] {
            let basis = gell_mann_basis(d).unwrap();
            let t = structure_tensors(&basis);
            let rho = DensityState::random_full_rank(d, 0.01, &mut rng);
            let exact = exact_covariance(&rho, &KrausChannel::identity(d), &basis).unwrap();
            let rebuilt =
                equal_time_from_means(&t, d, &exact.mean_early, Provenance::Exact).unwrap();
            assert!((exact.sigma - rebuilt.sigma).amax() < 1e-12);
        }
    }

    #[test]
    fn budget_formulas() {
        assert_eq!(required_trials(0.1, 1.0 / 12.0).unwrap(), 278);
        assert_eq!(
            trials_bound(0.1, std::f64::consts::FRAC_1_SQRT_2).unwrap(),
            278
        );
        let e = optimal_epsilon(0.01, 1.0 / 12.0).unwrap();
        assert!((e - 0.12f64.sqrt()).abs() < 1e-12);
        assert!((optimal_epsilon(0.3, 0.3).unwrap() - 1.0).abs() < 1e-15);
        let half = optimal_epsilon(0.005, 1.0 / 12.0).unwrap();
        assert!((half / e - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let n1 = 4.0 * (0.05f64).powi(2) / (0.02f64).powi(4);
        let n2 = 4.0 * (0.05f64).powi(2) / (0.01f64).powi(4);
        assert!((n2 / n1 - 16.0).abs() < 1e-9);
        assert!(required_trials(0.0, 0.1).is_err());
        assert!(optimal_epsilon(0.1, -1.0).is_err());
    }

    #[test]
    fn accounting_counts() {
        let b = Budget::new(0.1, 2.0 / 3.0, 100).unwrap();
        let a = Accounting::new(2, &b, Scheme::TwoPointer);
        assert_eq!(a.correlation_experiments, 9);
        assert_eq!(a.mean_experiments, 6);
        assert_eq!(a.total_trials(), 1500);
        let a3 = Accounting::new(3, &b, Scheme::SinglePointer);
        assert_eq!(a3.correlation_experiments, 64);
        assert_eq!(a3.correlation_trials(), 64 * 200);
    }

    #[test]
    fn sampled_converges_to_exact_within_bias() {
        let rho = DensityState::maximally_mixed(2);
        let eps = 0.3;
        let n = 1_000_000;
        let budget = Budget::new(0.1, eps, n).unwrap();
        let est = sampled_covariance(&rho, &pd(), &pauli_basis(), &budget, 1).unwrap();
        let exact = exact_covariance(&rho, &pd(), &pauli_basis()).unwrap();
        let tol = 2.0 * eps * eps / 12.0 + 5.0 * 2.0 / (eps * eps * (n as f64).sqrt());
        assert!((est.sigma - exact.sigma).amax() < tol);
    }

    #[test]
    fn determinism_and_degenerate_budget() {
        let rho = DensityState::maximally_mixed(2);
        let budget = Budget::new(0.1, 0.5, 1).unwrap();
        let a = sampled_covariance(&rho, &pd(), &pauli_basis(), &budget, 7).unwrap();
        let b = sampled_covariance(&rho, &pd(), &pauli_basis(), &budget, 7).unwrap();
        assert_eq!(a, b);
        match a.provenance {
            Provenance::Sampled { trials, .. } => assert_eq!(trials, 1),
            Provenance::Exact => panic!("expected sampled provenance"),
        }
        assert!(a.sigma.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn correction_removes_bias() {
        // σz–σz correlation has f = −1/12, bias −ε²/6 in σ̂
        let rho = DensityState::maximally_mixed(2);
        let id = KrausChannel::identity(2);
        let budget = Budget::new(0.1, 0.6, 4_000_000).unwrap();
        let opts = SamplingOptions {
            correct: true,
            ..Default::default()
        };
        let raw = sampled_covariance(&rho, &id, &pauli_basis(), &budget, 2).unwrap();
        let fixed = sampled_covariance_with(&rho, &id, &pauli_basis(), &budget, 2, opts).unwrap();
        let noise = 5.0 * 2.0 / (0.36 * 2000.0);
        assert!((raw.sigma[(2, 2)] - (1.0 - 0.36 / 6.0)).abs() < noise);
        assert!((fixed.sigma[(2, 2)] - 1.0).abs() < noise);
    }

    #[test]
    fn single_pointer_scheme_estimates_same_matrix() {
        let rho = DensityState::maximally_mixed(2);
        let eps = 0.3;
        let budget = Budget::new(0.1, eps, 1_000_000).unwrap();
        let opts = SamplingOptions {
            scheme: Scheme::SinglePointer,
            correct: false,
        };
        let est = sampled_covariance_with(&rho, &pd(), &pauli_basis(), &budget, 3, opts).unwrap();
        let exact = exact_covariance(&rho, &pd(), &pauli_basis()).unwrap();
        assert!((est.sigma - exact.sigma).amax() < 0.1);
    }

    #[test]
    fn reseeded_matches_fresh_sampler() {
        let rho = DensityState::maximally_mixed(2);
        let opts = SamplingOptions::default();
        let base = CovarianceSampler::new(&rho, &pd(), &pauli_basis(), 0.5, 1, opts).unwrap();
        let mut a = base.clone();
        a.advance(500, 500);
        let mut b = a.reseeded(9);
        b.advance(300, 300);
        let mut fresh = CovarianceSampler::new(&rho, &pd(), &pauli_basis(), 0.5, 9, opts).unwrap();
        fresh.advance(300, 300);
        assert_eq!(b.estimate(), fresh.estimate());
    }

    #[test]
    fn expected_estimate_is_the_large_n_limit() {
        let rho =
            DensityState::random_full_rank(2, 0.1, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        let ch = KrausChannel::amplitude_damping(0.3).unwrap();
        let basis = pauli_basis();
        let opts = SamplingOptions::default();
        let mut s = CovarianceSampler::new(&rho, &ch, &basis, 0.4, 5, opts).unwrap();
        let limit = s.expected_estimate();
        let exact = exact_covariance(&rho, &ch, &basis).unwrap();
        // bias is O(ε²) and nonzero
        let bias = (&limit.sigma - &exact.sigma).amax();
        assert!(bias > 1e-4 && bias < 0.16 * 2.0 / 3.0);
        s.advance(4_000_000, 4_000_000);
        let noise = 5.0 * 2.0 / (0.16 * 2000.0);
        assert!((s.estimate().sigma - &limit.sigma).amax() < noise);
        let corrected = CovarianceSampler::new(
            &rho,
            &ch,
            &basis,
            0.4,
            5,
            SamplingOptions {
                correct: true,
                ..opts
            },
        )
        .unwrap()
        .expected_estimate();
        assert!((corrected.sigma - exact.sigma).amax() < 0.4f64.powi(4));
    }
}
