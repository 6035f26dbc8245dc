//! Seeded Monte-Carlo draws of pointer outcomes.
//!
//! Per-trial draws are addressed by trial index inside the ChaCha stream, so
//! the same `(seed, index)` always yields the same outcome no matter how the
//! work is split across threads. Large budgets use binomial counts instead.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, Operator};

use super::two_pointer::{run_two_pointer, OutcomeDistribution, ProtocolRun, SIGNS};

const CHUNK: usize = 1 << 14;
/// ChaCha words consumed per trial (one `u64`).
const WORDS_PER_TRIAL: u128 = 2;

fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn outcome_index(cumulative: &[f64; 4], u: f64) -> usize {
    cumulative.iter().position(|&c| u < c).unwrap_or(3)
}

fn cumulative(dist: &OutcomeDistribution) -> [f64; 4] {
    let mut acc = 0.0;
    let mut out = [0.0; 4];
    for (o, p) in out.iter_mut().zip(dist.probs.iter()) {
        acc += p;
        *o = acc;
    }
    out[3] = f64::INFINITY;
    out
}

/// `n` draws of `(s₁, s₂)` from an exact distribution.
pub fn sample_outcomes(dist: &OutcomeDistribution, n: usize, seed: u64) -> Result<Vec<(i8, i8)>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "number of trials must be >= 1".into(),
        ));
    }
    let cum = cumulative(dist);
    let mut out = vec![(0i8, 0i8); n];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(k, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_word_pos((k * CHUNK) as u128 * WORDS_PER_TRIAL);
            for slot in chunk.iter_mut() {
                *slot = SIGNS[outcome_index(&cum, unit_interval(rng.next_u64()))];
            }
        });
    Ok(out)
}

/// `n` independent `s₁s₂` products, each from a fresh copy of the input state.
pub fn sample_trials(run: &ProtocolRun, n: usize, seed: u64) -> Result<Vec<i8>> {
    let dist = run_two_pointer(run)?;
    Ok(sample_outcomes(&dist, n, seed)?
        .into_iter()
        .map(|(a, b)| a * b)
        .collect())
}

/// Count-level sampler for large budgets.
#[derive(Debug, Clone)]
pub struct TrialSampler {
    rng: ChaCha8Rng,
}

impl TrialSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        if n == 0 {
            return 0;
        }
        let p = p.clamp(0.0, 1.0);
        Binomial::new(n, p)
            .expect("probability clamped to [0,1]")
            .sample(&mut self.rng)
    }

    /// Multinomial counts by sequential conditional binomials.
    pub fn multinomial(&mut self, n: u64, probs: &[f64]) -> Vec<u64> {
        let mut left = n;
        let mut mass = 1.0;
        let mut out = Vec::with_capacity(probs.len());
        for (k, &p) in probs.iter().enumerate() {
            let draw = if k + 1 == probs.len() || mass <= 0.0 {
                left
            } else {
                self.binomial(left, p / mass)
            };
            out.push(draw);
            left -= draw;
            mass -= p;
        }
        out
    }

    /// Sum of `n` products `s₁s₂`.
    pub fn product_sum(&mut self, dist: &OutcomeDistribution, n: u64) -> i64 {
        let plus = self.binomial(n, dist.p_product_plus());
        2 * plus as i64 - n as i64
    }

    /// Sum of `n` pointer readouts with `P(+1) = p_plus`.
    pub fn pm_sum(&mut self, p_plus: f64, n: u64) -> i64 {
        let plus = self.binomial(n, p_plus);
        2 * plus as i64 - n as i64
    }

    /// Sample mean of `n` projective measurements of `obs` on `rho`.
    pub fn projective_mean(&mut self, rho: &CMatrix, obs: &Operator, n: u64) -> f64 {
        let projectors = obs.spectral_projectors(1e-9);
        let probs: Vec<f64> = projectors
            .iter()
            .map(|(_, p)| (rho * p.matrix()).trace().re.max(0.0))
            .collect();
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let counts = self.multinomial(n, &probs);
        let sum: f64 = projectors
            .iter()
            .zip(counts)
            .map(|((value, _), k)| value * k as f64)
            .sum();
        sum / n as f64
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }
}
