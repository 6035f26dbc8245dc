use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qtomo::experiment::{run_and_write, ExperimentConfig, Verb};
use qtomo::Error;

/// Process tomography from weakly measured temporal correlations.
#[derive(Parser, Debug)]
#[command(name = "qtomo", version, about)]
struct Cli {
    #[command(subcommand)]
    verb: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Reconstruct one channel and write M, Kraus operators and diagnostics.
    Estimate,
    /// M-entry trajectories against cumulative trials.
    Fig1,
    /// Distributions of M entries over independent repetitions.
    Fig2,
    /// Mean spectral error of M against trials for several couplings.
    Fig3,
    /// Measurements needed to reach a target error, against standard tomography.
    CompareStandard,
    /// Gaussian-channel recovery from first and second moments.
    GaussianDemo,
}

impl Command {
    fn verb(self) -> Verb {
        match self {
            Command::Estimate => Verb::Estimate,
            Command::Fig1 => Verb::Fig1,
            Command::Fig2 => Verb::Fig2,
            Command::Fig3 => Verb::Fig3,
            Command::CompareStandard => Verb::CompareStandard,
            Command::GaussianDemo => Verb::GaussianDemo,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` config file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// e.g. phase-damping:0.5, amplitude-damping:0.3, depolarizing:0.1, random:7
    #[arg(long, global = true)]
    channel: Option<String>,
    /// e.g. maximally-mixed, thermal:1.0, random:3, matrix:0.6,0;0,0.4
    #[arg(long, global = true)]
    state: Option<String>,
    #[arg(long, global = true)]
    dim: Option<String>,
    /// Squared coupling, fractions allowed (4/9).
    #[arg(long, global = true)]
    eps2: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    mean_trials: Option<String>,
    #[arg(long, global = true)]
    reps: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// two-pointer | single-pointer | exact
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Subtract the known finite-coupling bias (two-pointer only).
    #[arg(long, global = true)]
    correct: bool,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    clamp: Option<String>,
    #[arg(long, global = true)]
    checkpoints: Option<String>,
    #[arg(long, global = true)]
    trials_list: Option<String>,
    #[arg(long, global = true)]
    eps2_list: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    deltas: Option<String>,
    #[arg(long, global = true)]
    baseline_reps: Option<String>,
    #[arg(long, global = true)]
    modes: Option<String>,
    #[arg(long, global = true)]
    bins: Option<String>,
    /// Any config key, repeatable: --set key=value
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = [
            ("channel", &self.channel),
            ("state", &self.state),
            ("dim", &self.dim),
            ("eps2", &self.eps2),
            ("trials", &self.trials),
            ("mean_trials", &self.mean_trials),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("mode", &self.mode),
            ("out", &self.out),
            ("clamp", &self.clamp),
            ("checkpoints", &self.checkpoints),
            ("trials_list", &self.trials_list),
            ("eps2_list", &self.eps2_list),
            ("delta", &self.delta),
            ("deltas", &self.deltas),
            ("baseline_reps", &self.baseline_reps),
            ("modes", &self.modes),
            ("bins", &self.bins),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
        if self.correct {
            out.push(("correct".into(), "true".into()));
        }
        out
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::SingularState { .. } => 3,
        Error::NotCompletelyPositive { .. } => 4,
        _ => 1,
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::defaults(cli.verb.verb());
    if let Some(path) = &cli.common.config {
        cfg.apply_file(path)?;
    }
    for (k, v) in cli.common.overrides() {
        cfg.set(&k, &v)?;
    }
    for kv in &cli.common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| {
        log::info!("config hash {}", cfg.hash());
        run_and_write(&cfg)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qtomo: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
