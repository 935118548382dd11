//! Bayesian bandit environments: an instance prior plus a reward family.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::sampling::{sample_bernoulli, BetaParams, GaussianParams, NormalGammaParams, RngStream};

/// Lower/upper clamp applied to a mean before it parameterizes a scaled Beta reward.
pub const BETA_MEAN_CLAMP: f64 = 1e-9;

/// An arm, numbered from 1 as in `[K] = {1, ..., K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arm(usize);

impl Arm {
    /// Arm with 1-based `number`; `None` for 0.
    pub fn new(number: usize) -> Option<Self> {
        (number >= 1).then_some(Self(number))
    }

    pub fn from_index(index: usize) -> Self {
        Self(index + 1)
    }

    pub fn number(self) -> usize {
        self.0
    }

    /// Zero-based position in per-arm vectors.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A realized bandit: per-arm mean rewards and reward variances.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl BanditInstance {
    pub fn new(mu: Vec<f64>, sigma2: Vec<f64>) -> Result<Self> {
        if mu.is_empty() || mu.len() != sigma2.len() {
            return Err(Error::Data(format!(
                "instance needs K >= 1 means and variances of equal length, got {} and {}",
                mu.len(),
                sigma2.len()
            )));
        }
        if sigma2.iter().any(|s| !(*s >= 0.0)) || mu.iter().any(|m| !m.is_finite()) {
            return Err(domain("instance needs finite means and variances >= 0"));
        }
        Ok(Self { mu, sigma2 })
    }

    pub fn arms(&self) -> usize {
        self.mu.len()
    }

    /// The best arm and its mean; ties go to the lowest arm number.
    pub fn optimum(&self) -> (Arm, f64) {
        let mut best = 0;
        for (i, m) in self.mu.iter().enumerate().skip(1) {
            if *m > self.mu[best] {
                best = i;
            }
        }
        (Arm::from_index(best), self.mu[best])
    }
}

pub fn instance_optimum(instance: &BanditInstance) -> (Arm, f64) {
    instance.optimum()
}

/// The three experiment families that [`make_env_spec`] knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKindName {
    Bernoulli,
    Beta,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvKind {
    /// Means from independent Gaussians, rewards Gaussian with known variances.
    GaussianKnownVar {
        prior: Vec<GaussianParams>,
        sigma2: Vec<f64>,
    },
    /// Mean and precision of each arm from a Normal-Gamma prior, Gaussian rewards.
    GaussianNG { prior: Vec<NormalGammaParams> },
    /// Means from Beta priors, Bernoulli rewards.
    BernoulliBeta { prior: Vec<BetaParams> },
    /// Means from Beta priors, rewards `Beta(s * mu, s * (1 - mu))`.
    BetaScaled { prior: Vec<BetaParams>, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    kind: EnvKind,
}

impl EnvSpec {
    pub fn new(kind: EnvKind) -> Result<Self> {
        let arms = match &kind {
            EnvKind::GaussianKnownVar { prior, sigma2 } => {
                if prior.len() != sigma2.len() {
                    return Err(Error::Data(format!(
                        "{} prior entries but {} variances",
                        prior.len(),
                        sigma2.len()
                    )));
                }
                for p in prior {
                    p.validate()?;
                }
                if sigma2.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                    return Err(domain("known reward variances must be finite and >= 0"));
                }
                prior.len()
            }
            EnvKind::GaussianNG { prior } => {
                for p in prior {
                    p.validate()?;
                    if p.is_degenerate() {
                        return Err(Error::DegeneratePrior(format!(
                            "environment prior must have kappa0 > 0 and beta0 > 0, got {p:?}"
                        )));
                    }
                }
                prior.len()
            }
            EnvKind::BernoulliBeta { prior } => {
                for p in prior {
                    p.validate()?;
                }
                prior.len()
            }
            EnvKind::BetaScaled { prior, scale } => {
                for p in prior {
                    p.validate()?;
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(domain(format!("beta reward scale must be > 0, got {scale}")));
                }
                prior.len()
            }
        };
        if arms == 0 {
            return Err(domain("environment needs K >= 1 arms"));
        }
        Ok(Self { kind })
    }

    pub fn kind(&self) -> &EnvKind {
        &self.kind
    }

    pub fn arms(&self) -> usize {
        match &self.kind {
            EnvKind::GaussianKnownVar { prior, .. } => prior.len(),
            EnvKind::GaussianNG { prior } => prior.len(),
            EnvKind::BernoulliBeta { prior } => prior.len(),
            EnvKind::BetaScaled { prior, .. } => prior.len(),
        }
    }

    /// Short family label used in output files.
    pub fn label(&self) -> &'static str {
        match &self.kind {
            EnvKind::GaussianKnownVar { .. } => "gaussian_known",
            EnvKind::GaussianNG { .. } => "gaussian",
            EnvKind::BernoulliBeta { .. } => "bernoulli",
            EnvKind::BetaScaled { .. } => "beta",
        }
    }

    pub fn sample_instance(&self, rng: &mut RngStream) -> Result<BanditInstance> {
        let (mu, sigma2) = match &self.kind {
            EnvKind::GaussianKnownVar { prior, sigma2 } => {
                let mu = prior.iter().map(|p| p.sample(rng)).collect::<Result<Vec<_>>>()?;
                (mu, sigma2.clone())
            }
            EnvKind::GaussianNG { prior } => {
                let mut mu = Vec::with_capacity(prior.len());
                let mut sigma2 = Vec::with_capacity(prior.len());
                for p in prior {
                    let (m, precision) = p.sample(rng)?;
                    mu.push(m);
                    sigma2.push(1.0 / precision);
                }
                (mu, sigma2)
            }
            EnvKind::BernoulliBeta { prior } => {
                let mu = prior.iter().map(|p| p.sample(rng)).collect::<Result<Vec<_>>>()?;
                let sigma2 = mu.iter().map(|m| m * (1.0 - m)).collect();
                (mu, sigma2)
            }
            EnvKind::BetaScaled { prior, scale } => {
                let mu = prior.iter().map(|p| p.sample(rng)).collect::<Result<Vec<_>>>()?;
                let sigma2 = mu.iter().map(|m| m * (1.0 - m) / (scale + 1.0)).collect();
                (mu, sigma2)
            }
        };
        BanditInstance::new(mu, sigma2)
    }

    pub fn sample_reward(
        &self,
        instance: &BanditInstance,
        arm: Arm,
        rng: &mut RngStream,
    ) -> Result<f64> {
        let i = arm.index();
        if i >= instance.arms() {
            return Err(Error::Index {
                arm: arm.number(),
                arms: instance.arms(),
            });
        }
        let mu = instance.mu[i];
        match &self.kind {
            EnvKind::GaussianKnownVar { .. } | EnvKind::GaussianNG { .. } => {
                GaussianParams::new(mu, instance.sigma2[i])?.sample(rng)
            }
            EnvKind::BernoulliBeta { .. } => sample_bernoulli(mu, rng),
            EnvKind::BetaScaled { scale, .. } => {
                let m = mu.clamp(BETA_MEAN_CLAMP, 1.0 - BETA_MEAN_CLAMP);
                BetaParams::new(scale * m, scale * (1.0 - m))?.sample(rng)
            }
        }
    }

    /// The Gaussian mean prior and known variances, for known-variance envs.
    pub fn known_variance_prior(&self) -> Option<(&[GaussianParams], &[f64])> {
        match &self.kind {
            EnvKind::GaussianKnownVar { prior, sigma2 } => Some((prior, sigma2)),
            _ => None,
        }
    }

    pub fn normal_gamma_prior(&self) -> Option<&[NormalGammaParams]> {
        match &self.kind {
            EnvKind::GaussianNG { prior } => Some(prior),
            _ => None,
        }
    }
}

/// The experiment environments with `K` arms, arm `i` centred at `i / (K + 1)`:
/// Bernoulli rewards with `Beta(i, K + 1 - i)` means, the same means with
/// `Beta(10 mu, 10 (1 - mu))` rewards, and Gaussian rewards from
/// `NG(i / (K + 1), K, 4, 1)`.
pub fn make_env_spec(kind: EnvKindName, arms: usize) -> Result<EnvSpec> {
    if arms < 1 {
        return Err(domain("environment needs K >= 1 arms"));
    }
    let k = arms as f64;
    let beta_prior = || {
        (1..=arms)
            .map(|i| BetaParams::new(i as f64, k + 1.0 - i as f64))
            .collect::<Result<Vec<_>>>()
    };
    let kind = match kind {
        EnvKindName::Bernoulli => EnvKind::BernoulliBeta { prior: beta_prior()? },
        EnvKindName::Beta => EnvKind::BetaScaled {
            prior: beta_prior()?,
            scale: 10.0,
        },
        EnvKindName::Gaussian => EnvKind::GaussianNG {
            prior: (1..=arms)
                .map(|i| NormalGammaParams::new(i as f64 / (k + 1.0), k, 4.0, 1.0))
                .collect::<Result<Vec<_>>>()?,
        },
    };
    EnvSpec::new(kind)
}
