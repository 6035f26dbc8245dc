//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::basis::{gell_mann_basis, OperatorBasis};
use crate::channel::KrausChannel;
use crate::covariance::{Budget, SamplingOptions, Scheme};
use crate::error::{Error, Result};
use crate::operator::{CMatrix, Operator};
use crate::reconstruction::Mode;
use crate::state::DensityState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Estimate,
    Fig1,
    Fig2,
    Fig3,
    CompareStandard,
    GaussianDemo,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Estimate => "estimate",
            Verb::Fig1 => "fig1",
            Verb::Fig2 => "fig2",
            Verb::Fig3 => "fig3",
            Verb::CompareStandard => "compare-standard",
            Verb::GaussianDemo => "gaussian-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    TwoPointer,
    SinglePointer,
    Exact,
}

impl RunMode {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "two-pointer" => Ok(RunMode::TwoPointer),
            "single-pointer" => Ok(RunMode::SinglePointer),
            "exact" => Ok(RunMode::Exact),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (two-pointer | single-pointer | exact)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunMode::TwoPointer => "two-pointer",
            RunMode::SinglePointer => "single-pointer",
            RunMode::Exact => "exact",
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            RunMode::SinglePointer => Scheme::SinglePointer,
            _ => Scheme::TwoPointer,
        }
    }
}

/// Channel description, e.g. `phase-damping:0.5` or `rotation:0,0,1:0.3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec(pub String);

impl ChannelSpec {
    pub fn build(&self, dim: usize) -> Result<KrausChannel> {
        let parts: Vec<&str> = self.0.split(':').collect();
        let num = |k: usize| -> Result<f64> {
            parts
                .get(k)
                .ok_or_else(|| {
                    Error::Config(format!("channel '{}' is missing a parameter", self.0))
                })?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("channel '{}': {e}", self.0)))
        };
        let qubit = || -> Result<()> {
            if dim != 2 {
                return Err(Error::Config(format!(
                    "channel '{}' is defined for D = 2",
                    self.0
                )));
            }
            Ok(())
        };
        let ch = match parts[0] {
            "identity" => Ok(KrausChannel::identity(dim)),
            "phase-damping" => {
                qubit()?;
                KrausChannel::phase_damping(num(1)?)
            }
            "amplitude-damping" => {
                qubit()?;
                KrausChannel::amplitude_damping(num(1)?)
            }
            "depolarizing" => KrausChannel::depolarizing(dim, num(1)?),
            "rotation" => {
                qubit()?;
                let axis: Vec<f64> = parts
                    .get(1)
                    .ok_or_else(|| Error::Config("rotation needs an axis".into()))?
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Config(format!("rotation axis: {e}")))?;
                if axis.len() != 3 {
                    return Err(Error::Config("rotation axis needs 3 components".into()));
                }
                KrausChannel::rotation([axis[0], axis[1], axis[2]], num(2)?)
            }
            "random" => {
                let seed = num(1)? as u64;
                Ok(KrausChannel::random(
                    dim,
                    &mut ChaCha8Rng::seed_from_u64(seed),
                ))
            }
            other => Err(Error::Config(format!("unknown channel '{other}'"))),
        };
        ch.map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(format!("channel '{}': {other}", self.0)),
        })
    }
}

fn parse_complex(s: &str) -> Result<num_complex::Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("cannot parse complex number '{s}'"));
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(num_complex::Complex64::new(
            re.parse::<f64>().map_err(|_| bad())?,
            im,
        ))
    } else {
        Ok(num_complex::Complex64::new(
            t.parse::<f64>().map_err(|_| bad())?,
            0.0,
        ))
    }
}

/// State description: `maximally-mixed`, `thermal:β[:e0,e1,…]`,
/// `random:seed[:floor]`, or `matrix:a,b;c,d` with complex entries like `0.1-0.2i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec(pub String);

impl StateSpec {
    pub fn build(&self, dim: usize) -> Result<DensityState> {
        let parts: Vec<&str> = self.0.splitn(3, ':').collect();
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(format!("state '{}': {other}", self.0)),
        };
        match parts[0] {
            "maximally-mixed" => Ok(DensityState::maximally_mixed(dim)),
            "thermal" => {
                let beta: f64 = parts
                    .get(1)
                    .ok_or_else(|| Error::Config("thermal state needs β".into()))?
                    .parse()
                    .map_err(|e| Error::Config(format!("thermal β: {e}")))?;
                let energies: Vec<f64> = match parts.get(2) {
                    Some(list) => list
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Config(format!("thermal energies: {e}")))?,
                    None => (0..dim).map(|k| k as f64).collect(),
                };
                if energies.len() != dim {
                    return Err(Error::Config(format!(
                        "thermal state needs {dim} energies, got {}",
                        energies.len()
                    )));
                }
                let h = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    dim,
                    energies
                        .iter()
                        .map(|&e| num_complex::Complex64::new(e, 0.0)),
                ));
                DensityState::thermal(&Operator::hermitian(h).map_err(wrap)?, beta).map_err(wrap)
            }
            "random" => {
                let seed: u64 = parts
                    .get(1)
                    .ok_or_else(|| Error::Config("random state needs a seed".into()))?
                    .parse()
                    .map_err(|e| Error::Config(format!("random state seed: {e}")))?;
                let floor: f64 = match parts.get(2) {
                    Some(x) => x
                        .parse()
                        .map_err(|e| Error::Config(format!("floor: {e}")))?,
                    None => 0.02,
                };
                Ok(DensityState::random_full_rank(
                    dim,
                    floor,
                    &mut ChaCha8Rng::seed_from_u64(seed),
                ))
            }
            "matrix" => {
                let body = self.0.trim_start_matches("matrix:");
                let rows: Vec<Vec<num_complex::Complex64>> = body
                    .split(';')
                    .map(|r| r.split(',').map(parse_complex).collect::<Result<_>>())
                    .collect::<Result<_>>()?;
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Config(format!("state matrix must be {dim}x{dim}")));
                }
                let m = CMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
                DensityState::from_matrix(m).map_err(wrap)
            }
            other => Err(Error::Config(format!("unknown state '{other}'"))),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_scalar(key, s.trim()))
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::Config(format!("{key} = '{value}': {e}")))
}

/// Parses a real that may be written as a fraction, e.g. `4/9`.
fn parse_real(key: &str, value: &str) -> Result<f64> {
    match value.split_once('/') {
        Some((a, b)) => Ok(parse_scalar::<f64>(key, a)? / parse_scalar::<f64>(key, b)?),
        None => parse_scalar(key, value),
    }
}

fn parse_real_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_real(key, s.trim()))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("{key} = '{other}' is not a boolean"))),
    }
}

/// Fully resolved settings for one CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub verb: Verb,
    pub channel: ChannelSpec,
    pub state: StateSpec,
    pub dim: usize,
    pub eps2: f64,
    pub trials: u64,
    /// `None` means one mean trial per correlation trial.
    pub mean_trials: Option<u64>,
    pub reps: usize,
    pub seed: u64,
    pub mode: RunMode,
    pub correct: bool,
    pub out: PathBuf,
    pub clamp: Option<f64>,
    pub checkpoints: Vec<u64>,
    pub trials_list: Vec<u64>,
    pub eps2_list: Vec<f64>,
    pub delta: f64,
    pub deltas: Vec<f64>,
    pub baseline_reps: usize,
    pub modes: usize,
    pub bins: usize,
}

pub const FIG1_CHECKPOINTS: [u64; 9] = [25, 50, 100, 250, 500, 1000, 2500, 5000, 10_000];

fn fig3_checkpoints() -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 10u64;
    while decade <= 1_000_000 {
        for m in [1, 2, 5] {
            let n = decade * m;
            if n <= 1_000_000 {
                out.push(n);
            }
        }
        decade *= 10;
    }
    out
}

impl ExperimentConfig {
    pub fn defaults(verb: Verb) -> Self {
        let reps = match verb {
            Verb::Fig2 => 1000,
            Verb::Fig3 => 20,
            Verb::CompareStandard => 400,
            Verb::GaussianDemo => 100,
            _ => 1,
        };
        Self {
            verb,
            channel: ChannelSpec("phase-damping:0.5".into()),
            state: StateSpec("maximally-mixed".into()),
            dim: 2,
            eps2: 4.0 / 9.0,
            trials: 2500,
            mean_trials: None,
            reps,
            seed: 1,
            mode: RunMode::TwoPointer,
            correct: false,
            out: PathBuf::from("out"),
            clamp: None,
            checkpoints: match verb {
                Verb::Fig3 => fig3_checkpoints(),
                _ => FIG1_CHECKPOINTS.to_vec(),
            },
            trials_list: match verb {
                Verb::GaussianDemo => vec![1_000, 10_000, 100_000, 1_000_000],
                _ => vec![400, 3000],
            },
            eps2_list: vec![2.0 / 9.0, 4.0 / 9.0, 6.0 / 9.0],
            delta: 0.1,
            deltas: vec![0.1, 0.07, 0.05, 0.035],
            baseline_reps: 1000,
            modes: 1,
            bins: 30,
        }
    }

    /// Keys accepted in files and via `--set`.
    pub const KEYS: [&'static str; 20] = [
        "channel",
        "state",
        "dim",
        "eps2",
        "trials",
        "mean_trials",
        "reps",
        "seed",
        "mode",
        "correct",
        "out",
        "clamp",
        "checkpoints",
        "trials_list",
        "eps2_list",
        "delta",
        "deltas",
        "baseline_reps",
        "modes",
        "bins",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "channel" => self.channel = ChannelSpec(v.to_string()),
            "state" => self.state = StateSpec(v.to_string()),
            "dim" => self.dim = parse_scalar(key, v)?,
            "eps2" => self.eps2 = parse_real(key, v)?,
            "trials" => self.trials = parse_scalar(key, v)?,
            "mean_trials" => self.mean_trials = Some(parse_scalar(key, v)?),
            "reps" => self.reps = parse_scalar(key, v)?,
            "seed" => self.seed = parse_scalar(key, v)?,
            "mode" => self.mode = RunMode::parse(v)?,
            "correct" => self.correct = parse_bool(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "clamp" => self.clamp = Some(parse_real(key, v)?),
            "checkpoints" => self.checkpoints = parse_list(key, v)?,
            "trials_list" => self.trials_list = parse_list(key, v)?,
            "eps2_list" => self.eps2_list = parse_real_list(key, v)?,
            "delta" => self.delta = parse_real(key, v)?,
            "deltas" => self.deltas = parse_real_list(key, v)?,
            "baseline_reps" => self.baseline_reps = parse_scalar(key, v)?,
            "modes" => self.modes = parse_scalar(key, v)?,
            "bins" => self.bins = parse_scalar(key, v)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key = value, got '{line}'",
                    n + 1
                ))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dim < 2 {
            return fail(format!("dim must be >= 2, got {}", self.dim));
        }
        if !(self.eps2 > 0.0 && self.eps2 < 1.0) && self.mode != RunMode::Exact {
            return fail(format!("eps2 must lie in (0, 1), got {}", self.eps2));
        }
        if self.trials == 0 || self.reps == 0 || self.baseline_reps == 0 {
            return fail("trials, reps and baseline_reps must be >= 1".into());
        }
        if self.mean_trials == Some(0) {
            return fail("mean_trials must be >= 1".into());
        }
        if self.correct && self.mode == RunMode::SinglePointer {
            return fail("correct = true requires the two-pointer mode".into());
        }
        if let Some(c) = self.clamp {
            if !(c >= 0.0) {
                return fail(format!("clamp must be >= 0, got {c}"));
            }
        }
        if !(self.delta > 0.0) || self.deltas.iter().any(|d| !(*d > 0.0)) {
            return fail("delta values must be positive".into());
        }
        if self.eps2_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return fail("eps2_list entries must lie in (0, 1)".into());
        }
        if self.checkpoints.is_empty() || self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return fail("checkpoints must be strictly increasing".into());
        }
        if self.checkpoints[0] == 0 || self.trials_list.contains(&0) {
            return fail("trial counts must be >= 1".into());
        }
        if self.modes == 0 || self.bins == 0 {
            return fail("modes and bins must be >= 1".into());
        }
        self.channel.build(self.dim)?;
        self.state.build(self.dim)?;
        Ok(())
    }

    /// Canonical `key=value` listing used for hashing and provenance.
    pub fn canonical(&self) -> String {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let joinf = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut map = BTreeMap::new();
        map.insert("verb", self.verb.name().to_string());
        map.insert("channel", self.channel.0.clone());
        map.insert("state", self.state.0.clone());
        map.insert("dim", self.dim.to_string());
        map.insert("eps2", format!("{:e}", self.eps2));
        map.insert("trials", self.trials.to_string());
        map.insert(
            "mean_trials",
            self.mean_trials.map_or("trials".into(), |m| m.to_string()),
        );
        map.insert("reps", self.reps.to_string());
        map.insert("seed", self.seed.to_string());
        map.insert("mode", self.mode.name().to_string());
        map.insert("correct", self.correct.to_string());
        map.insert(
            "clamp",
            self.clamp.map_or("default".into(), |c| format!("{c:e}")),
        );
        map.insert("checkpoints", join(&self.checkpoints));
        map.insert("trials_list", join(&self.trials_list));
        map.insert("eps2_list", joinf(&self.eps2_list));
        map.insert("delta", format!("{:e}", self.delta));
        map.insert("deltas", joinf(&self.deltas));
        map.insert("baseline_reps", self.baseline_reps.to_string());
        map.insert("modes", self.modes.to_string());
        map.insert("bins", self.bins.to_string());
        let mut s = String::new();
        for (k, v) in map {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// SHA-256 of [`ExperimentConfig::canonical`]; the output directory is excluded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn basis(&self) -> Result<OperatorBasis> {
        gell_mann_basis(self.dim)
    }

    pub fn build_channel(&self) -> Result<KrausChannel> {
        self.channel.build(self.dim)
    }

    pub fn build_state(&self) -> Result<DensityState> {
        self.state.build(self.dim)
    }

    pub fn mean_trials_for(&self, trials: u64) -> u64 {
        match self.mean_trials {
            Some(m) if self.trials > 0 => ((m as f64) * (trials as f64) / (self.trials as f64))
                .round()
                .max(1.0) as u64,
            _ => trials,
        }
    }

    pub fn budget(&self, eps2: f64, trials: u64) -> Result<Budget> {
        Budget::from_eps2(eps2, trials)?.with_mean_trials(self.mean_trials_for(trials))
    }

    pub fn sampling_options(&self) -> SamplingOptions {
        SamplingOptions {
            scheme: self.mode.scheme(),
            correct: self.correct,
        }
    }

    pub fn reconstruction_mode(&self, eps2: f64, trials: u64, seed: u64) -> Result<Mode> {
        Ok(match self.mode {
            RunMode::Exact => Mode::Exact,
            _ => Mode::Sampled {
                budget: self.budget(eps2, trials)?,
                seed,
                options: self.sampling_options(),
            },
        })
    }
}
