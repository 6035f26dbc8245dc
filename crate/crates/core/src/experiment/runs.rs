//! Experiment drivers behind the CLI verbs. Each returns plain data; the
//! `*_tables` functions turn it into CSV tables.

use std::time::{Duration, Instant};

use log::info;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::OperatorBasis;
use crate::channel::KrausChannel;
use crate::covariance::{Accounting, CovarianceSampler};
use crate::error::{Error, Result};
use crate::gaussian::{
    correlation_count, equal_time_gaussian, recover_affine_gaussian,
    recover_affine_gaussian_with_tol, temporal_covariance_gaussian, GaussianChannelTruth,
    GaussianState, NoisyMoments,
};
use crate::random::derive_seed;
use crate::reconstruction::{
    reconstruct_channel_with, recover_m_with_tol, spectral_norm, AffineDynamics, Diagnostics,
    PipelineTolerances,
};
use crate::state::DensityState;
use crate::structure::{structure_tensors, StructureTensors};
use crate::tolerance::INVERTIBILITY_TOL;

use super::config::{ExperimentConfig, RunMode, Verb};
use super::output::{entry_names, num, Table};
use super::standard::{entry_rms, reaches, search_min, standard_rms, StandardTomography};

/// Ground truth and derived objects shared by the drivers.
#[derive(Debug, Clone)]
pub struct Setup {
    pub state: DensityState,
    pub channel: KrausChannel,
    pub basis: OperatorBasis,
    pub tensors: StructureTensors,
    pub truth: AffineDynamics,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let state = cfg.build_state()?;
        let channel = cfg.build_channel()?;
        let basis = cfg.basis()?;
        let tensors = structure_tensors(&basis);
        let truth = AffineDynamics::from_channel(&channel, &basis)?;
        Ok(Self {
            state,
            channel,
            basis,
            tensors,
            truth,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn sampler(
        &self,
        cfg: &ExperimentConfig,
        eps2: f64,
        seed: u64,
    ) -> Result<CovarianceSampler> {
        CovarianceSampler::new(
            &self.state,
            &self.channel,
            &self.basis,
            eps2.sqrt(),
            seed,
            cfg.sampling_options(),
        )
    }

    /// `M` from the sampler's current counts.
    pub fn current_m(&self, s: &CovarianceSampler) -> Result<DMatrix<f64>> {
        let ct = s.estimate();
        let c0 = s.equal_time(&self.tensors, self.dim())?;
        recover_m_with_tol(&ct, &c0, INVERTIBILITY_TOL)
    }

    /// `M` in the infinite-trial limit at the sampler's coupling.
    pub fn limit_m(&self, s: &CovarianceSampler) -> Result<DMatrix<f64>> {
        let ct = s.expected_estimate();
        let c0 = s.expected_equal_time(&self.tensors, self.dim())?;
        recover_m_with_tol(&ct, &c0, INVERTIBILITY_TOL)
    }
}

fn row_of(m: &DMatrix<f64>) -> Vec<String> {
    // row-major, matching `entry_names`
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| num(m[(i, j)]))
        .collect()
}

fn rep_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    derive_seed(cfg.seed, &[rep as u64])
}

/// One channel estimate.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rep: usize,
    pub seed: u64,
    pub trials: u64,
    pub dynamics: AffineDynamics,
    pub kraus: KrausChannel,
    pub diagnostics: Diagnostics,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct EstimateOutput {
    pub truth: AffineDynamics,
    pub records: Vec<RunRecord>,
}

pub fn estimate(cfg: &ExperimentConfig) -> Result<EstimateOutput> {
    let setup = Setup::new(cfg)?;
    let records = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = rep_seed(cfg, rep);
            let mode = cfg.reconstruction_mode(cfg.eps2, cfg.trials, seed)?;
            let mut tol = PipelineTolerances::for_mode(&mode);
            if let Some(c) = cfg.clamp {
                tol.clamp = c;
            }
            let start = Instant::now();
            let rec =
                reconstruct_channel_with(&setup.state, &setup.channel, &setup.basis, mode, tol)?;
            Ok(RunRecord {
                rep,
                seed,
                trials: if cfg.mode == RunMode::Exact {
                    0
                } else {
                    cfg.trials
                },
                dynamics: rec.dynamics,
                kraus: rec.kraus,
                diagnostics: rec.diagnostics,
                wall_time: start.elapsed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &records {
        info!("rep {} finished in {:.3?}", r.rep, r.wall_time);
    }
    Ok(EstimateOutput {
        truth: setup.truth,
        records,
    })
}

pub fn estimate_tables(out: &EstimateOutput) -> Vec<(&'static str, Table)> {
    let k = out.truth.len();
    let chi_names = (1..=k).map(|i| format!("chi_{i}"));
    let mut m = Table::new(
        ["kind", "rep", "seed"]
            .into_iter()
            .map(String::from)
            .chain(entry_names("M", k))
            .chain(chi_names),
    );
    let mut row = |kind: &str, rep: String, seed: String, d: &AffineDynamics| {
        let mut r = vec![kind.to_string(), rep, seed];
        r.extend(row_of(&d.m));
        r.extend(d.chi.iter().map(|&x| num(x)));
        m.push(r);
    };
    row("truth", "-".into(), "-".into(), &out.truth);
    for rec in &out.records {
        row(
            "estimate",
            rec.rep.to_string(),
            rec.seed.to_string(),
            &rec.dynamics,
        );
    }

    let mut kraus = Table::new(["rep", "operator", "row", "col", "re", "im"]);
    for rec in &out.records {
        for (mu, op) in rec.kraus.operators().iter().enumerate() {
            let mat = op.matrix();
            for r in 0..mat.nrows() {
                for c in 0..mat.ncols() {
                    kraus.push(vec![
                        rec.rep.to_string(),
                        mu.to_string(),
                        r.to_string(),
                        c.to_string(),
                        num(mat[(r, c)].re),
                        num(mat[(r, c)].im),
                    ]);
                }
            }
        }
    }

    let mut diag = Table::new([
        "rep",
        "seed",
        "trials",
        "delta_m",
        "delta_m_max",
        "delta_chi",
        "action_error",
        "min_singular_value",
        "min_gram_eigenvalue",
        "clamped",
        "kraus_rank",
        "completeness_defect",
        "correlation_trials",
        "total_trials",
    ]);
    let opt = |x: Option<f64>| x.map_or("nan".to_string(), num);
    for rec in &out.records {
        let d = &rec.diagnostics;
        let acc = d.accounting;
        diag.push(vec![
            rec.rep.to_string(),
            rec.seed.to_string(),
            rec.trials.to_string(),
            opt(d.delta_m),
            opt(d.delta_m_max),
            opt(d.delta_chi),
            opt(d.action_error),
            num(d.min_singular_value),
            num(d.gram_eigenvalues.last().copied().unwrap_or(f64::NAN)),
            d.clamped.to_string(),
            d.kraus_rank.to_string(),
            num(d.completeness_defect),
            acc.map_or(0, |a| a.correlation_trials()).to_string(),
            acc.map_or(0, |a| a.total_trials()).to_string(),
        ]);
    }
    vec![
        ("m_matrix.csv", m),
        ("kraus.csv", kraus),
        ("diagnostics.csv", diag),
    ]
}

/// `M` estimate at one cumulative trial count.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub rep: usize,
    pub trials: u64,
    pub m: DMatrix<f64>,
    pub delta_m: f64,
}

#[derive(Debug, Clone)]
pub struct Fig1Output {
    pub truth: AffineDynamics,
    pub points: Vec<TrajectoryPoint>,
}

/// One running estimate per rep, evaluated at each checkpoint; the trials
/// behind checkpoint `k+1` extend those behind checkpoint `k`.
pub fn trajectory(
    setup: &Setup,
    cfg: &ExperimentConfig,
    eps2: f64,
    seed: u64,
    rep: usize,
    base: Option<&CovarianceSampler>,
) -> Result<Vec<TrajectoryPoint>> {
    let mut s = match base {
        Some(b) => b.reseeded(seed),
        None => setup.sampler(cfg, eps2, seed)?,
    };
    let mut out = Vec::with_capacity(cfg.checkpoints.len());
    let (mut done, mut done_mean) = (0u64, 0u64);
    for &n in &cfg.checkpoints {
        let mean_n = cfg.mean_trials_for(n);
        s.advance(n - done, mean_n.saturating_sub(done_mean));
        done = n;
        done_mean = done_mean.max(mean_n);
        // a singular early checkpoint (e.g. all outcomes equal at tiny N) is
        // recorded as NaN instead of ending the trajectory
        let m = match setup.current_m(&s) {
            Ok(m) => m,
            Err(Error::SingularState { .. }) => {
                DMatrix::from_element(setup.truth.m.nrows(), setup.truth.m.ncols(), f64::NAN)
            }
            Err(e) => return Err(e),
        };
        let delta_m = spectral_norm_or_nan(&(&m - &setup.truth.m));
        out.push(TrajectoryPoint {
            rep,
            trials: n,
            m,
            delta_m,
        });
    }
    Ok(out)
}

fn spectral_norm_or_nan(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|x| x.is_finite()) {
        spectral_norm(m)
    } else {
        f64::NAN
    }
}

fn exact_points(setup: &Setup, checkpoints: &[u64], rep: usize) -> Vec<TrajectoryPoint> {
    checkpoints
        .iter()
        .map(|&n| TrajectoryPoint {
            rep,
            trials: n,
            m: setup.truth.m.clone(),
            delta_m: 0.0,
        })
        .collect()
}

pub fn fig1(cfg: &ExperimentConfig) -> Result<Fig1Output> {
    let setup = Setup::new(cfg)?;
    let points = if cfg.mode == RunMode::Exact {
        (0..cfg.reps)
            .flat_map(|r| exact_points(&setup, &cfg.checkpoints, r))
            .collect()
    } else {
        let base = setup.sampler(cfg, cfg.eps2, cfg.seed)?;
        let per_rep = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| trajectory(&setup, cfg, cfg.eps2, rep_seed(cfg, rep), rep, Some(&base)))
            .collect::<Result<Vec<_>>>()?;
        per_rep.into_iter().flatten().collect()
    };
    Ok(Fig1Output {
        truth: setup.truth,
        points,
    })
}

pub fn fig1_tables(out: &Fig1Output) -> Vec<(&'static str, Table)> {
    let k = out.truth.len();
    let mut t = Table::new(
        ["rep", "N"]
            .into_iter()
            .map(String::from)
            .chain(entry_names("M", k))
            .chain(std::iter::once("delta_m".to_string())),
    );
    let mut truth = vec!["truth".to_string(), "-".to_string()];
    truth.extend(row_of(&out.truth.m));
    truth.push(num(0.0));
    t.push(truth);
    for p in &out.points {
        let mut r = vec![p.rep.to_string(), p.trials.to_string()];
        r.extend(row_of(&p.m));
        r.push(num(p.delta_m));
        t.push(r);
    }
    vec![("fig1.csv", t)]
}

/// Per-entry sample mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryStats {
    pub mean: DMatrix<f64>,
    pub std: DMatrix<f64>,
}

impl EntryStats {
    pub fn of(samples: &[DMatrix<f64>]) -> Self {
        let n = samples.len();
        let (r, c) = samples.first().map_or((0, 0), |m| m.shape());
        let mut mean = DMatrix::zeros(r, c);
        for m in samples {
            mean += m;
        }
        mean /= n.max(1) as f64;
        let mut var = DMatrix::zeros(r, c);
        for m in samples {
            var += (m - &mean).map(|x| x * x);
        }
        var /= (n.max(2) - 1) as f64;
        Self {
            mean,
            std: var.map(f64::sqrt),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fig2Block {
    pub trials: u64,
    pub estimates: Vec<DMatrix<f64>>,
    pub stats: EntryStats,
}

#[derive(Debug, Clone)]
pub struct Fig2Output {
    pub truth: AffineDynamics,
    pub eps2: f64,
    pub blocks: Vec<Fig2Block>,
}

/// Independent repetitions of the estimator at each trial count in `trials_list`.
pub fn fig2(cfg: &ExperimentConfig) -> Result<Fig2Output> {
    let setup = Setup::new(cfg)?;
    let base = match cfg.mode {
        RunMode::Exact => None,
        _ => Some(setup.sampler(cfg, cfg.eps2, cfg.seed)?),
    };
    let mut blocks = Vec::new();
    for (b, &n) in cfg.trials_list.iter().enumerate() {
        let estimates = match &base {
            None => vec![setup.truth.m.clone(); cfg.reps],
            Some(base) => (0..cfg.reps)
                .into_par_iter()
                .map(|rep| {
                    let mut s = base.reseeded(derive_seed(cfg.seed, &[b as u64, rep as u64]));
                    s.advance(n, cfg.mean_trials_for(n));
                    setup.current_m(&s)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let stats = EntryStats::of(&estimates);
        blocks.push(Fig2Block {
            trials: n,
            estimates,
            stats,
        });
    }
    Ok(Fig2Output {
        truth: setup.truth,
        eps2: cfg.eps2,
        blocks,
    })
}

pub fn fig2_tables(out: &Fig2Output, bins: usize) -> Vec<(&'static str, Table)> {
    let k = out.truth.len();
    let note = format!("eps2={} (shared with fig1)", num(out.eps2));
    let mut samples = Table::new(
        ["trials", "rep"]
            .into_iter()
            .map(String::from)
            .chain(entry_names("M", k)),
    );
    samples.note(note.clone());
    let mut summary = Table::new(["trials", "entry", "truth", "mean", "std"]);
    summary.note(note.clone());
    let mut hist = Table::new(["trials", "entry", "bin_lo", "bin_hi", "count"]);
    hist.note(note);
    let names = entry_names("M", k);
    for block in &out.blocks {
        for (rep, m) in block.estimates.iter().enumerate() {
            let mut r = vec![block.trials.to_string(), rep.to_string()];
            r.extend(row_of(m));
            samples.push(r);
        }
        for i in 0..k {
            for j in 0..k {
                let name = &names[i * k + j];
                summary.push(vec![
                    block.trials.to_string(),
                    name.clone(),
                    num(out.truth.m[(i, j)]),
                    num(block.stats.mean[(i, j)]),
                    num(block.stats.std[(i, j)]),
                ]);
                let vals: Vec<f64> = block.estimates.iter().map(|m| m[(i, j)]).collect();
                for (lo, hi, count) in histogram(&vals, bins) {
                    hist.push(vec![
                        block.trials.to_string(),
                        name.clone(),
                        num(lo),
                        num(hi),
                        count.to_string(),
                    ]);
                }
            }
        }
    }
    vec![
        ("fig2_samples.csv", samples),
        ("fig2_summary.csv", summary),
        ("fig2_histogram.csv", hist),
    ]
}

/// Equal-width bins over the sample range.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1e-12;
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / w) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, n)| (lo + b as f64 * w, lo + (b + 1) as f64 * w, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Point {
    pub eps2: f64,
    pub trials: u64,
    /// Over the reps whose estimate was not singular at this checkpoint.
    pub mean_delta: f64,
    pub std_delta: f64,
    pub singular: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Output {
    pub points: Vec<Fig3Point>,
    /// `(ε², ‖ΔM‖)` in the infinite-trial limit.
    pub plateaus: Vec<(f64, f64)>,
}

/// Mean spectral error `‖ΔM‖` over seeds against the trial count, per coupling.
pub fn fig3(cfg: &ExperimentConfig) -> Result<Fig3Output> {
    let setup = Setup::new(cfg)?;
    let mut points = Vec::new();
    let mut plateaus = Vec::new();
    for (e, &eps2) in cfg.eps2_list.iter().enumerate() {
        if cfg.mode == RunMode::Exact {
            points.extend(cfg.checkpoints.iter().map(|&n| Fig3Point {
                eps2,
                trials: n,
                mean_delta: 0.0,
                std_delta: 0.0,
                singular: 0,
            }));
            plateaus.push((eps2, 0.0));
            continue;
        }
        let base = setup.sampler(cfg, eps2, cfg.seed)?;
        plateaus.push((
            eps2,
            spectral_norm(&(setup.limit_m(&base)? - &setup.truth.m)),
        ));
        let runs = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(cfg.seed, &[e as u64, rep as u64]);
                trajectory(&setup, cfg, eps2, seed, rep, Some(&base))
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, &n) in cfg.checkpoints.iter().enumerate() {
            let d: Vec<f64> = runs
                .iter()
                .map(|r| r[c].delta_m)
                .filter(|x| x.is_finite())
                .collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let var =
                d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len().max(2) - 1) as f64;
            points.push(Fig3Point {
                eps2,
                trials: n,
                mean_delta: mean,
                std_delta: var.sqrt(),
                singular: runs.len() - d.len(),
            });
        }
    }
    Ok(Fig3Output { points, plateaus })
}

pub fn fig3_tables(out: &Fig3Output) -> Vec<(&'static str, Table)> {
    let mut t = Table::new(["eps2", "N", "mean_delta_m", "std_delta_m", "singular"]);
    for p in &out.points {
        t.push(vec![
            num(p.eps2),
            p.trials.to_string(),
            num(p.mean_delta),
            num(p.std_delta),
            p.singular.to_string(),
        ]);
    }
    let mut plateau = Table::new(["eps2", "limit_delta_m"]);
    for &(e, d) in &out.plateaus {
        plateau.push(vec![num(e), num(d)]);
    }
    vec![("fig3.csv", t), ("fig3_plateau.csv", plateau)]
}

/// Measurements needed by both methods at one target error.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachPoint {
    pub delta: f64,
    pub eps2: f64,
    /// Trials per correlation for the temporal method.
    pub temporal_trials: Option<u64>,
    /// `K² N` correlation runs.
    pub temporal_total: Option<u64>,
    /// Including the `2K` mean-value experiments.
    pub temporal_total_with_means: Option<u64>,
    pub standard_shots: Option<u64>,
    pub standard_total: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutput {
    /// At `cfg.delta` and `cfg.eps2`.
    pub headline: ReachPoint,
    /// Over `cfg.deltas`, with `ε² ∝ δ` anchored at `(cfg.delta, cfg.eps2)`.
    pub scaling: Vec<ReachPoint>,
    pub temporal_slope: Option<f64>,
    pub standard_slope: Option<f64>,
}

const SEARCH_CAP: u64 = 1 << 34;

/// RMS error of the temporal estimate of `M` at `n` trials per correlation.
pub fn temporal_rms(
    setup: &Setup,
    cfg: &ExperimentConfig,
    base: &CovarianceSampler,
    n: u64,
    reps: usize,
) -> DMatrix<f64> {
    let k = setup.truth.len();
    let est: Vec<DMatrix<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut s = base.reseeded(derive_seed(cfg.seed, &[rep as u64]));
            s.advance(n, cfg.mean_trials_for(n));
            // a singular estimate counts as a miss on every entry
            setup
                .current_m(&s)
                .unwrap_or_else(|_| DMatrix::from_element(k, k, f64::INFINITY))
        })
        .collect();
    entry_rms(&est, &setup.truth.m)
}

fn reach_point(
    setup: &Setup,
    cfg: &ExperimentConfig,
    standard: &StandardTomography,
    delta: f64,
    eps2: f64,
) -> Result<ReachPoint> {
    let k = setup.truth.len();
    let allowed = 1;
    let temporal = if cfg.mode == RunMode::Exact {
        Some(1)
    } else {
        let base = setup.sampler(cfg, eps2, cfg.seed)?;
        search_min(16, SEARCH_CAP, |n| {
            reaches(
                &temporal_rms(setup, cfg, &base, n, cfg.reps),
                delta,
                allowed,
            )
        })
    };
    let shots = search_min(4, SEARCH_CAP, |n| {
        reaches(
            &standard_rms(standard, &setup.truth.m, n, cfg.baseline_reps, cfg.seed),
            delta,
            allowed,
        )
    });
    let corr = (k * k) as u64;
    Ok(ReachPoint {
        delta,
        eps2,
        temporal_trials: temporal,
        temporal_total: temporal.map(|n| corr * n),
        temporal_total_with_means: temporal
            .map(|n| corr * n + 2 * k as u64 * cfg.mean_trials_for(n)),
        standard_shots: shots,
        standard_total: shots.map(StandardTomography::total_measurements),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn compare_standard(cfg: &ExperimentConfig) -> Result<CompareOutput> {
    let setup = Setup::new(cfg)?;
    let standard = StandardTomography::new(&setup.channel)?;
    let headline = reach_point(&setup, cfg, &standard, cfg.delta, cfg.eps2)?;
    let scaling = cfg
        .deltas
        .iter()
        .map(|&d| {
            let eps2 = cfg.eps2 * d / cfg.delta;
            if !(eps2 < 1.0) {
                return Err(Error::Config(format!(
                    "delta {d} maps to eps2 = {eps2}, outside the weak regime"
                )));
            }
            reach_point(&setup, cfg, &standard, d, eps2)
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = |f: &dyn Fn(&ReachPoint) -> Option<u64>| {
        let pts: Option<Vec<(f64, f64)>> = scaling
            .iter()
            .map(|p| f(p).map(|n| (p.delta, n as f64)))
            .collect();
        pts.and_then(|p| log_log_slope(&p))
    };
    let temporal_slope = if cfg.mode == RunMode::Exact {
        None
    } else {
        slope(&|p| p.temporal_trials)
    };
    let standard_slope = slope(&|p| p.standard_shots);
    Ok(CompareOutput {
        headline,
        scaling,
        temporal_slope,
        standard_slope,
    })
}

pub fn compare_tables(out: &CompareOutput) -> Vec<(&'static str, Table)> {
    let header = [
        "delta",
        "eps2",
        "temporal_trials_per_correlation",
        "temporal_total",
        "temporal_total_with_means",
        "standard_shots_per_setting",
        "standard_total",
    ];
    let opt = |x: Option<u64>| x.map_or("unreached".to_string(), |n| n.to_string());
    let row = |p: &ReachPoint| {
        vec![
            num(p.delta),
            num(p.eps2),
            opt(p.temporal_trials),
            opt(p.temporal_total),
            opt(p.temporal_total_with_means),
            opt(p.standard_shots),
            opt(p.standard_total),
        ]
    };
    let mut head = Table::new(header);
    head.note("criterion=at most one entry of M with RMS error >= delta");
    head.push(row(&out.headline));
    let mut scaling = Table::new(header);
    let slope = |s: Option<f64>| s.map_or("nan".to_string(), num);
    scaling.note(format!(
        "temporal_slope={} standard_slope={}",
        slope(out.temporal_slope),
        slope(out.standard_slope)
    ));
    for p in &out.scaling {
        scaling.push(row(p));
    }
    vec![("compare.csv", head), ("compare_scaling.csv", scaling)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianExactRecord {
    pub rep: usize,
    pub m_error: f64,
    pub chi_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNoisePoint {
    pub trials: u64,
    /// Mean over the reps whose noisy equal-time covariance stayed physical.
    pub mean_m_error: f64,
    pub moment_std: f64,
    /// Reps rejected by the relaxed uncertainty check.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDemoOutput {
    pub n_modes: usize,
    pub correlations: usize,
    pub exact: Vec<GaussianExactRecord>,
    pub noisy: Vec<GaussianNoisePoint>,
}

/// Random `n`-mode channels and states: exact recovery, then recovery from
/// moments with `N(0, (2/(ε²√N))²)` noise.
pub fn gaussian_demo(cfg: &ExperimentConfig) -> Result<GaussianDemoOutput> {
    let n = cfg.modes;
    let instance = |rep: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(cfg, rep));
        let ch = GaussianChannelTruth::random(n, &mut rng);
        let st = GaussianState::random(n, 1.0, &mut rng);
        (ch, st, rng)
    };
    let exact = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let (ch, st, _) = instance(rep);
            let got = recover_affine_gaussian(
                &temporal_covariance_gaussian(&st, &ch)?,
                &equal_time_gaussian(&st),
            )?;
            Ok(GaussianExactRecord {
                rep,
                m_error: (&got.m - &ch.m).amax(),
                chi_error: (&got.chi - &ch.chi).amax(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut noisy = Vec::new();
    for &trials in &cfg.trials_list {
        let noise = NoisyMoments {
            eps2: cfg.eps2,
            trials,
        };
        let errs = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let (ch, st, mut rng) = instance(rep);
                let ct = noise.perturb(&temporal_covariance_gaussian(&st, &ch)?, &mut rng);
                let c0 = noise.perturb(&equal_time_gaussian(&st), &mut rng);
                // noisy moments get the uncertainty check relaxed to 10 s
                Ok(
                    match recover_affine_gaussian_with_tol(&ct, &c0, 10.0 * noise.std_dev()) {
                        Ok(d) => Some((&d.m - &ch.m).amax()),
                        Err(Error::UncertaintyViolation { .. }) => None,
                        Err(e) => return Err(e),
                    },
                )
            })
            .collect::<Result<Vec<Option<f64>>>>()?;
        let ok: Vec<f64> = errs.iter().flatten().copied().collect();
        noisy.push(GaussianNoisePoint {
            trials,
            mean_m_error: if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().sum::<f64>() / ok.len() as f64
            },
            moment_std: noise.std_dev(),
            failures: errs.len() - ok.len(),
        });
    }
    Ok(GaussianDemoOutput {
        n_modes: n,
        correlations: correlation_count(n),
        exact,
        noisy,
    })
}

pub fn gaussian_tables(out: &GaussianDemoOutput) -> Vec<(&'static str, Table)> {
    let mut exact = Table::new(["rep", "n_modes", "m_error", "chi_error"]);
    exact.note(format!("correlations={}", out.correlations));
    for r in &out.exact {
        exact.push(vec![
            r.rep.to_string(),
            out.n_modes.to_string(),
            num(r.m_error),
            num(r.chi_error),
        ]);
    }
    let mut noisy = Table::new(["trials", "moment_std", "mean_m_error", "rejected"]);
    for p in &out.noisy {
        noisy.push(vec![
            p.trials.to_string(),
            num(p.moment_std),
            num(p.mean_m_error),
            p.failures.to_string(),
        ]);
    }
    vec![("gaussian_exact.csv", exact), ("gaussian_noise.csv", noisy)]
}

/// Runs the verb named in `cfg` and returns its output tables.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<(&'static str, Table)>> {
    cfg.validate()?;
    Ok(match cfg.verb {
        Verb::Estimate => estimate_tables(&estimate(cfg)?),
        Verb::Fig1 => fig1_tables(&fig1(cfg)?),
        Verb::Fig2 => fig2_tables(&fig2(cfg)?, cfg.bins),
        Verb::Fig3 => fig3_tables(&fig3(cfg)?),
        Verb::CompareStandard => compare_tables(&compare_standard(cfg)?),
        Verb::GaussianDemo => gaussian_tables(&gaussian_demo(cfg)?),
    })
}

/// [`run`], then writes every table under `cfg.out`.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<Vec<std::path::PathBuf>> {
    let tables = run(cfg)?;
    let mut paths = Vec::new();
    for (name, t) in &tables {
        t.write(&cfg.out, name, cfg)?;
        paths.push(cfg.out.join(name));
    }
    Ok(paths)
}

/// Experiment counts for one estimate at the configured budget.
pub fn accounting(cfg: &ExperimentConfig) -> Result<Accounting> {
    Ok(Accounting::new(
        cfg.dim,
        &cfg.budget(cfg.eps2, cfg.trials)?,
        cfg.mode.scheme(),
    ))
}
