use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::operator::{partial_trace_last, pauli, CMatrix, Operator};
use crate::state::DensityState;

use super::pointer::{coupling_propagator, PointerConfig};

/// One correlation experiment: couple a pointer to `obs_early` at `t₁`, let
/// `channel` act, couple a second pointer to `obs_late` at `t₂`.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub channel: KrausChannel,
    pub obs_early: Operator,
    pub obs_late: Operator,
    pub state: DensityState,
    pub config: PointerConfig,
}

impl ProtocolRun {
    pub fn new(
        channel: KrausChannel,
        obs_early: Operator,
        obs_late: Operator,
        state: DensityState,
        config: PointerConfig,
    ) -> Result<Self> {
        let d = state.dim();
        for found in [channel.dim(), obs_early.dim(), obs_late.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        for obs in [&obs_early, &obs_late] {
            if !obs.is_hermitian() {
                return Err(Error::NotHermitian {
                    deviation: crate::operator::hermiticity_deviation(obs.matrix()),
                });
            }
        }
        Ok(Self {
            channel,
            obs_early,
            obs_late,
            state,
            config,
        })
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// Same run with a different coupling strength.
    pub fn with_config(&self, config: PointerConfig) -> Self {
        Self {
            config,
            ..self.clone()
        }
    }

    /// `B_j(t₂) = Λ†(obs_late)`.
    pub fn late_heisenberg(&self) -> Operator {
        Operator::from_matrix_unchecked(
            self.channel
                .heisenberg_matrix(self.obs_late.matrix())
                .expect("dimensions validated at construction"),
        )
    }

    /// `Tr(ρ {B_i(t₁), B_j(t₂)})`.
    pub fn anticommutator(&self) -> f64 {
        self.state
            .expectation(&self.obs_early.anticommutator(&self.late_heisenberg()))
    }
}

/// Exact joint statistics of the two `σz` pointer readouts.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    /// Probabilities of `(s₁, s₂)` in the order `(+,+), (+,−), (−,+), (−,−)`.
    pub probs: [f64; 4],
    /// System state after both couplings, averaged over outcomes.
    pub post_state: CMatrix,
}

impl OutcomeDistribution {
    /// Probability that `s₁s₂ = +1`.
    pub fn p_product_plus(&self) -> f64 {
        self.probs[0] + self.probs[3]
    }

    /// Mean `⟨s₁⟩` and `⟨s₂⟩`.
    pub fn marginal_means(&self) -> (f64, f64) {
        let p = &self.probs;
        (p[0] + p[1] - p[2] - p[3], p[0] - p[1] + p[2] - p[3])
    }
}

/// `σz`-readout diagonal of the pointer register for `(s₁,s₂)`.
pub(crate) const SIGNS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn run_two_pointer(run: &ProtocolRun) -> Result<OutcomeDistribution> {
    let d = run.dim();
    let half = -run.config.epsilon() / 2.0;
    let sy = pauli::y();
    let u1 = coupling_propagator(&run.obs_early, &sy, half, 0, 2)?;
    let u2 = coupling_propagator(&run.obs_late, &sy, half, 1, 2)?;
    let pointers = PointerConfig::pointer_init().kronecker(&PointerConfig::pointer_init());
    let mut joint = run.state.matrix().kronecker(&pointers);
    joint = &u1 * joint * u1.adjoint();
    joint = run.channel.apply_on_system(&joint, 4)?;
    joint = &u2 * joint * u2.adjoint();

    let mut probs = [0.0; 4];
    for (slot, p) in probs.iter_mut().enumerate() {
        // pointer register index: p1 * 2 + p2, with |0⟩ = ↑z
        *p = (0..d)
            .map(|s| joint[(s * 4 + slot, s * 4 + slot)].re)
            .sum::<f64>();
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p = (*p / total).max(0.0);
    }
    Ok(OutcomeDistribution {
        probs,
        post_state: partial_trace_last(&joint, d, 4),
    })
}

/// `E(σz⊗σz) = Σ s₁s₂ p(s₁,s₂)`.
pub fn product_expectation(dist: &OutcomeDistribution) -> f64 {
    SIGNS
        .iter()
        .zip(dist.probs.iter())
        .map(|(&(a, b), p)| f64::from(a * b) * p)
        .sum()
}

/// Variance of the `±1` product statistic.
pub fn product_variance(dist: &OutcomeDistribution) -> f64 {
    let e = product_expectation(dist);
    1.0 - e * e
}

/// Trace distance between the system marginal after the first coupling alone
/// and the input state. Meaningful for the identity channel, where it isolates
/// measurement back-action.
pub fn back_action(run: &ProtocolRun) -> Result<f64> {
    let d = run.dim();
    let u = coupling_propagator(
        &run.obs_early,
        &pauli::y(),
        -run.config.epsilon() / 2.0,
        0,
        1,
    )?;
    let joint = run.state.matrix().kronecker(&PointerConfig::pointer_init());
    let after = &u * joint * u.adjoint();
    let marginal = partial_trace_last(&after, d, 2);
    let diff = marginal - run.state.matrix();
    Ok(0.5 * crate::operator::trace_norm_hermitian(&diff))
}
