//! Conventional qubit process tomography used as the comparison baseline:
//! prepare `|0⟩, |1⟩, |+⟩, |+i⟩`, measure the output in `X`, `Y`, `Z`
//! (12 settings) and invert linearly for the Bloch affine map.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::operator::{c, pauli, CMatrix};
use crate::random::derive_seed;
use crate::reconstruction::AffineDynamics;
use crate::weak::TrialSampler;

const TAG_STANDARD: u64 = 0xB0;

/// Number of (input, measurement axis) settings.
pub const SETTINGS: u64 = 12;

fn inputs() -> [CMatrix; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |a: num_complex::Complex64, b: num_complex::Complex64| {
        let v = nalgebra::DVector::from_vec(vec![a, b]);
        &v * v.adjoint()
    };
    [
        ket(c(1.0, 0.0), c(0.0, 0.0)),
        ket(c(0.0, 0.0), c(1.0, 0.0)),
        ket(c(h, 0.0), c(h, 0.0)),
        ket(c(h, 0.0), c(0.0, h)),
    ]
}

#[derive(Debug, Clone)]
pub struct StandardTomography {
    /// `P(+1)` for each input (rows) and axis `x, y, z` (columns).
    p_plus: [[f64; 3]; 4],
}

impl StandardTomography {
    pub fn new(channel: &KrausChannel) -> Result<Self> {
        if channel.dim() != 2 {
            return Err(Error::InvalidArgument(format!(
                "standard tomography baseline is implemented for D = 2, got {}",
                channel.dim()
            )));
        }
        let axes = pauli::xyz();
        let mut p_plus = [[0.0; 3]; 4];
        for (row, rho) in p_plus.iter_mut().zip(inputs().iter()) {
            let out = channel.apply_matrix(rho)?;
            for (p, a) in row.iter_mut().zip(axes.iter()) {
                let e = (&out * a.matrix()).trace().re;
                *p = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
            }
        }
        Ok(Self { p_plus })
    }

    /// Linear inversion from output Bloch vectors `r[input][axis]`, returned in
    /// the normalized Pauli basis (`M = T`, `χ = t/√2`).
    pub fn invert(r: &[[f64; 3]; 4]) -> AffineDynamics {
        let t: Vec<f64> = (0..3).map(|a| 0.5 * (r[0][a] + r[1][a])).collect();
        let m = DMatrix::from_fn(3, 3, |a, col| match col {
            0 => r[2][a] - t[a],
            1 => r[3][a] - t[a],
            _ => 0.5 * (r[0][a] - r[1][a]),
        });
        let chi = DVector::from_iterator(3, t.iter().map(|x| x * std::f64::consts::FRAC_1_SQRT_2));
        AffineDynamics { m, chi }
    }

    pub fn exact(&self) -> AffineDynamics {
        let mut r = [[0.0; 3]; 4];
        for (ri, pi) in r.iter_mut().zip(self.p_plus.iter()) {
            for (x, p) in ri.iter_mut().zip(pi.iter()) {
                *x = 2.0 * p - 1.0;
            }
        }
        Self::invert(&r)
    }

    /// Estimate with `shots` projective measurements per setting.
    pub fn estimate(&self, shots: u64, seed: u64) -> AffineDynamics {
        let mut r = [[0.0; 3]; 4];
        for (input, (ri, pi)) in r.iter_mut().zip(self.p_plus.iter()).enumerate() {
            for (axis, (x, &p)) in ri.iter_mut().zip(pi.iter()).enumerate() {
                let mut s = TrialSampler::new(derive_seed(
                    seed,
                    &[TAG_STANDARD, input as u64, axis as u64],
                ));
                *x = s.pm_sum(p, shots) as f64 / shots as f64;
            }
        }
        Self::invert(&r)
    }

    pub fn total_measurements(shots: u64) -> u64 {
        SETTINGS * shots
    }
}

/// Entrywise root-mean-square error of a set of estimates.
pub fn entry_rms(estimates: &[DMatrix<f64>], truth: &DMatrix<f64>) -> DMatrix<f64> {
    let n = estimates.len().max(1) as f64;
    let mut acc = DMatrix::zeros(truth.nrows(), truth.ncols());
    for e in estimates {
        acc += (e - truth).map(|x| x * x);
    }
    acc.map(|x| (x / n).sqrt())
}

/// True when all but at most `allowed_failures` entries have RMS error below `delta`.
pub fn reaches(rms: &DMatrix<f64>, delta: f64, allowed_failures: usize) -> bool {
    rms.iter().filter(|&&x| !(x < delta)).count() <= allowed_failures
}

/// Smallest `n >= 1` with `accept(n)`, assuming monotone acceptance: doubling
/// from `start`, then bisection. Returns `None` if `cap` is exceeded.
pub fn search_min(start: u64, cap: u64, accept: impl Fn(u64) -> bool) -> Option<u64> {
    // invariant: accept(hi) and !accept(lo), with lo = 0 counting as rejected
    let mut lo = 0;
    let mut hi = start.max(1);
    while !accept(hi) {
        if hi >= cap {
            return None;
        }
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if accept(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// RMS error of the baseline's `M` over `reps` seeds at `shots` per setting.
pub fn standard_rms(
    tomo: &StandardTomography,
    truth: &DMatrix<f64>,
    shots: u64,
    reps: usize,
    seed: u64,
) -> DMatrix<f64> {
    let est: Vec<DMatrix<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| tomo.estimate(shots, derive_seed(seed, &[r as u64])).m)
        .collect();
    entry_rms(&est, truth)
}
