//! Method-of-moments estimation of Normal-Gamma hyper-parameters from prior
//! draws of per-arm means and reward precisions.

use std::fmt;
use std::str::FromStr;

use crate::envs::EnvSpec;
use crate::error::{data, domain, Error, Result};
use crate::sampling::{NormalGammaParams, RngStream};

/// Empirical moments of mean and precision draws for one arm.
///
/// Variances use the unbiased `n - 1` divisor. The reward-variance moments are
/// the moments of `1 / precision`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean_of_means: f64,
    pub var_of_means: f64,
    pub mean_of_precisions: f64,
    pub var_of_precisions: f64,
    pub mean_of_variances: f64,
    pub var_of_variances: f64,
    pub sample_count: usize,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub fn summarize(mean_samples: &[f64], precision_samples: &[f64]) -> Result<MomentSummary> {
    if mean_samples.len() < 2 || precision_samples.len() < 2 {
        return Err(data(format!(
            "need at least 2 mean and precision samples, got {} and {}",
            mean_samples.len(),
            precision_samples.len()
        )));
    }
    if mean_samples.iter().any(|m| !m.is_finite()) {
        return Err(data("mean samples must be finite"));
    }
    if let Some(p) = precision_samples.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(domain(format!("precision samples must be positive and finite, got {p}")));
    }
    let (mean_of_means, var_of_means) = mean_var(mean_samples);
    let (mean_of_precisions, var_of_precisions) = mean_var(precision_samples);
    let variances: Vec<f64> = precision_samples.iter().map(|p| 1.0 / p).collect();
    let (mean_of_variances, var_of_variances) = mean_var(&variances);
    Ok(MomentSummary {
        mean_of_means,
        var_of_means,
        mean_of_precisions,
        var_of_precisions,
        mean_of_variances,
        var_of_variances,
        sample_count: mean_samples.len().min(precision_samples.len()),
    })
}

/// How moments are turned into Normal-Gamma hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// `mu0 = m`, `beta0 = l / nu`, `alpha0 = beta0 / l`, `kappa0 = beta0 / (alpha0 v)`,
    /// kept for comparison. It does not match the Gamma moments of the precision.
    Paper,
    /// Gamma moments of the precision (`alpha0 / beta0 = l`, `alpha0 / beta0^2 = nu`)
    /// and the marginal variance of the mean (`beta0 / (kappa0 (alpha0 - 1)) = v`).
    #[default]
    Exact,
    /// Inverse-Gamma moments of the reward variance `s = 1 / precision`
    /// (`beta0 / (alpha0 - 1) = E[s]`, `E[s]^2 / (alpha0 - 2) = Var[s]`) and
    /// `kappa0 = E[s] / v`. Stays defined when the precision is heavy-tailed.
    Variance,
}

impl FitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMode::Paper => "paper",
            FitMode::Exact => "exact",
            FitMode::Variance => "variance",
        }
    }
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(FitMode::Paper),
            "exact" => Ok(FitMode::Exact),
            "variance" => Ok(FitMode::Variance),
            other => Err(domain(format!(
                "unknown fit mode `{other}` (expected exact, paper or variance)"
            ))),
        }
    }
}

pub fn fit_normal_gamma(summary: &MomentSummary, mode: FitMode) -> Result<NormalGammaParams> {
    let s = summary;
    if !(s.var_of_means > 0.0) {
        return Err(Error::DegenerateMoments(format!(
            "variance of means is {}",
            s.var_of_means
        )));
    }
    let mu0 = s.mean_of_means;
    match mode {
        FitMode::Paper | FitMode::Exact => {
            if !(s.var_of_precisions > 0.0) {
                return Err(Error::DegenerateMoments(format!(
                    "variance of precisions is {}",
                    s.var_of_precisions
                )));
            }
            let beta0 = s.mean_of_precisions / s.var_of_precisions;
            if mode == FitMode::Paper {
                let alpha0 = beta0 / s.mean_of_precisions;
                let kappa0 = beta0 / (alpha0 * s.var_of_means);
                NormalGammaParams::new(mu0, kappa0, alpha0, beta0)
            } else {
                let alpha0 = s.mean_of_precisions * s.mean_of_precisions / s.var_of_precisions;
                if !(alpha0 > 1.0) {
                    return Err(Error::UndefinedMoment(format!(
                        "exact fit gives alpha0 = {alpha0} <= 1; marginal variance of the mean is undefined"
                    )));
                }
                let kappa0 = beta0 / ((alpha0 - 1.0) * s.var_of_means);
                NormalGammaParams::new(mu0, kappa0, alpha0, beta0)
            }
        }
        FitMode::Variance => {
            if !(s.var_of_variances > 0.0) {
                return Err(Error::DegenerateMoments(format!(
                    "variance of reward variances is {}",
                    s.var_of_variances
                )));
            }
            let m = s.mean_of_variances;
            let alpha0 = 2.0 + m * m / s.var_of_variances;
            let beta0 = m * (alpha0 - 1.0);
            let kappa0 = m / s.var_of_means;
            NormalGammaParams::new(mu0, kappa0, alpha0, beta0)
        }
    }
}

/// Fits a per-arm Normal-Gamma prior to `samples` instances drawn from `env`,
/// using each instance's means and reward precisions `1 / sigma2`.
pub fn fit_env_prior(
    env: &EnvSpec,
    mode: FitMode,
    samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<NormalGammaParams>> {
    let arms = env.arms();
    let mut means = vec![Vec::with_capacity(samples); arms];
    let mut precisions = vec![Vec::with_capacity(samples); arms];
    for _ in 0..samples {
        let inst = env.sample_instance(rng)?;
        for i in 0..arms {
            means[i].push(inst.mu[i]);
            precisions[i].push(1.0 / inst.sigma2[i]);
        }
    }
    means
        .iter()
        .zip(&precisions)
        .map(|(m, p)| fit_normal_gamma(&summarize(m, p)?, mode))
        .collect()
}
