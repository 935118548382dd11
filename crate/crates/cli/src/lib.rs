//! Command-line front end for bandit regret experiments.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad arguments, configuration
//! or input files), 2 for runtime failures (I/O, simulation or fitting errors).

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use bandit_lab::bounds::{
    bound_known_variance, bound_unknown_variance, c_squared_regrouped, KnownVarianceInputs,
    UnknownVarianceInputs,
};
use bandit_lab::prior_fit::{fit_normal_gamma, summarize};
use bandit_lab::runner::run_experiment;
use bandit_lab::{EnvKind, ExperimentConfig, FitMode, PolicySpec};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigDoc, ConfigError};
use crate::output::{curve_csv, CurveMeta};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Run(#[from] bandit_lab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Io { .. } | CliError::Run(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bandit-lab", version, about = "Bayes regret experiments for multi-armed bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Workers {
    /// Worker threads; output does not depend on this.
    #[arg(long, env = "BANDIT_LAB_WORKERS")]
    workers: Option<usize>,
}

impl Workers {
    fn count(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every configured policy and write one CSV per policy.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to [output] path).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Repeat the simulation for several arm counts; files are named `{policy}_K{K}.csv`.
    SweepK {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Print the Bayes regret bounds for the configured prior, horizon and delta.
    Bound {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a Normal-Gamma prior to sampled means and precisions.
    FitPrior {
        #[arg(long)]
        means: PathBuf,
        #[arg(long)]
        precisions: PathBuf,
        #[arg(long, default_value = "exact")]
        mode: String,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = String::new();
    match execute(cli.command, &mut stdout) {
        Ok(()) => {
            print!("{stdout}");
            0
        }
        Err(e) => {
            print!("{stdout}");
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut String) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            config,
            out: dir,
            workers,
        } => {
            let doc = load(&config)?;
            let dir = output_dir(dir, &doc)?;
            let experiment = doc.experiment(doc.arms).map_err(|e| config_error(&config, e))?;
            simulate(&experiment, &dir, workers.count(), false, out)
        }
        Command::SweepK {
            config,
            k,
            out: dir,
            workers,
        } => {
            let doc = load(&config)?;
            if !doc.is_k_generic() {
                return Err(CliError::Usage(
                    "sweep-k needs a configuration without per-arm lists".into(),
                ));
            }
            if k.iter().any(|&k| k < 1) {
                return Err(CliError::Usage("--k values must be >= 1".into()));
            }
            let dir = output_dir(dir, &doc)?;
            for arms in k {
                let experiment = doc.experiment(arms).map_err(|e| config_error(&config, e))?;
                simulate(&experiment, &dir, workers.count(), true, out)?;
            }
            Ok(())
        }
        Command::Bound { config } => {
            let doc = load(&config)?;
            let experiment = doc.experiment(doc.arms).map_err(|e| config_error(&config, e))?;
            bounds(&experiment, doc.delta, out)
        }
        Command::FitPrior {
            means,
            precisions,
            mode,
        } => {
            let mode: FitMode = mode.parse().map_err(|e: bandit_lab::Error| CliError::Usage(e.to_string()))?;
            let means = read_samples(&means)?;
            let precisions = read_samples(&precisions)?;
            let params = fit_normal_gamma(&summarize(&means, &precisions)?, mode)?;
            out.push_str(&format!(
                "mu0 = {}\nkappa0 = {}\nalpha0 = {}\nbeta0 = {}\n",
                params.mu0, params.kappa0, params.alpha0, params.beta0
            ));
            Ok(())
        }
    }
}

fn config_error(path: &Path, source: ConfigError) -> CliError {
    CliError::Config {
        path: path.to_path_buf(),
        source,
    }
}

fn load(path: &Path) -> Result<ConfigDoc, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ConfigDoc::parse(&text).map_err(|e| config_error(path, e))
}

fn output_dir(flag: Option<PathBuf>, doc: &ConfigDoc) -> Result<PathBuf, CliError> {
    flag.or_else(|| doc.output_path.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set [output] path".into()))
}

fn simulate(
    config: &ExperimentConfig,
    dir: &Path,
    workers: usize,
    k_in_name: bool,
    out: &mut String,
) -> Result<(), CliError> {
    let curves = run_experiment(config, workers)?;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let arms = config.env.arms();
    for (name, curve) in &curves {
        let meta = CurveMeta {
            policy: name,
            env: config.env.label(),
            arms,
            horizon: config.horizon,
            seed: config.root_seed,
        };
        let file = if k_in_name {
            dir.join(format!("{name}_K{arms}.csv"))
        } else {
            dir.join(format!("{name}.csv"))
        };
        fs::write(&file, curve_csv(curve, &meta)).map_err(|source| CliError::Io {
            path: file.clone(),
            source,
        })?;
        out.push_str(&format!(
            "{name} K={arms}: regret at round {} = {} (stderr {}, {} runs) -> {}\n",
            config.horizon,
            curve.final_mean(),
            curve.final_stderr(),
            curve.runs,
            file.display()
        ));
    }
    Ok(())
}

fn bounds(config: &ExperimentConfig, delta: Option<f64>, out: &mut String) -> Result<(), CliError> {
    let horizon = config.horizon as u64;
    let delta = delta.unwrap_or(1.0 / config.horizon as f64);
    out.push_str(&format!("horizon = {horizon}\ndelta = {delta}\n"));
    let mut printed = false;

    if let EnvKind::GaussianKnownVar { prior, sigma2 } = config.env.kind() {
        let value = bound_known_variance(&KnownVarianceInputs {
            horizon,
            delta,
            prior_var: prior.iter().map(|p| p.variance).collect(),
            sigma2: sigma2.clone(),
        })?;
        out.push_str(&format!("known_variance.bound = {value}\n"));
        printed = true;
    }

    let mut unknown = |label: &str, prior: &[bandit_lab::NormalGammaParams], out: &mut String| {
        let inputs = UnknownVarianceInputs {
            horizon,
            delta,
            prior: prior.to_vec(),
        };
        match (bound_unknown_variance(&inputs), c_squared_regrouped(&inputs)) {
            (Ok(b), Ok(regrouped)) => out.push_str(&format!(
                "{label}.c = {}\n{label}.c_squared_regrouped = {regrouped}\n{label}.bound = {}\n",
                b.c, b.bound
            )),
            (Err(e), _) | (_, Err(e)) => out.push_str(&format!("{label}.bound = undefined ({e})\n")),
        }
        printed = true;
    };
    if let Some(prior) = config.env.normal_gamma_prior() {
        unknown("unknown_variance", prior, out);
    }
    for p in &config.policies {
        if let PolicySpec::VarTs { prior } = &p.spec {
            if config.env.normal_gamma_prior() != Some(prior.as_slice()) {
                unknown(&format!("unknown_variance[{}]", p.name), prior, out);
            }
        }
    }

    if printed {
        Ok(())
    } else {
        Err(CliError::Usage(
            "no bound applies: use a gaussian or gaussian_known environment or a varts policy".into(),
        ))
    }
}

/// One real per line; blank lines and text after `#` are ignored.
fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Usage(format!("{}:{}: `{line}` is not a number", path.display(), i + 1))
        })?;
        values.push(v);
    }
    Ok(values)
}
