//! Closed-form conjugate posteriors computed from per-arm sufficient statistics.

use super::ArmStats;
use crate::error::{domain, Error, Result};
use crate::sampling::{GaussianParams, NormalGammaParams};

/// Gaussian posterior over an arm's mean given a Gaussian prior and a known
/// reward variance. Returns `(posterior mean, posterior variance)`.
pub fn gaussian_ts_posterior(
    prior: GaussianParams,
    known_sigma2: f64,
    stats: &ArmStats,
) -> Result<(f64, f64)> {
    if !(known_sigma2 > 0.0 && known_sigma2.is_finite()) {
        return Err(domain(format!(
            "known reward variance must be > 0, got {known_sigma2}"
        )));
    }
    prior.validate()?;
    if prior.variance == 0.0 || stats.count == 0 {
        return Ok((prior.mean, prior.variance));
    }
    let n = stats.count as f64;
    let var = 1.0 / (1.0 / prior.variance + n / known_sigma2);
    let mean = var * (prior.mean / prior.variance + n * stats.mean / known_sigma2);
    Ok((mean, var))
}

/// Normal-Gamma posterior parameters of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarTsPosterior {
    pub mu_hat: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Normal-Gamma conjugate update from batch statistics:
///
/// ```text
/// kappa = kappa0 + N
/// alpha = alpha0 + N / 2
/// beta  = beta0 + m2 / 2 + kappa0 N (mean - mu0)^2 / (2 (kappa0 + N))
/// mu    = (kappa0 mu0 + N mean) / (kappa0 + N)
/// ```
pub fn varts_posterior(prior: NormalGammaParams, stats: &ArmStats) -> Result<VarTsPosterior> {
    prior.validate()?;
    if stats.count == 0 {
        if prior.kappa0 == 0.0 {
            return Err(Error::DegeneratePrior(
                "posterior mean undefined with kappa0 = 0 and no observations".into(),
            ));
        }
        return Ok(VarTsPosterior {
            mu_hat: prior.mu0,
            kappa: prior.kappa0,
            alpha: prior.alpha0,
            beta: prior.beta0,
        });
    }
    let n = stats.count as f64;
    let kappa = prior.kappa0 + n;
    let gap = stats.mean - prior.mu0;
    Ok(VarTsPosterior {
        mu_hat: (prior.kappa0 * prior.mu0 + n * stats.mean) / kappa,
        kappa,
        alpha: prior.alpha0 + n / 2.0,
        beta: prior.beta0 + stats.m2 / 2.0 + prior.kappa0 * n * gap * gap / (2.0 * kappa),
    })
}
