//! Bandit agents behind a uniform select/observe interface.
//!
//! Sampled-precision agents (VarTS, TS14, TS20) share one code path: each is a
//! Normal-Gamma Thompson sampler, TS14 and TS20 only fix degenerate priors.

mod posterior;
mod stats;
mod ucb;

use std::fmt;
use std::str::FromStr;

pub use posterior::{gaussian_ts_posterior, varts_posterior, VarTsPosterior};
pub use stats::ArmStats;
pub use ucb::{ucb_index, ucb_index_ln, UcbKind, UcbVConstants};

use rand::Rng;

use crate::envs::Arm;
use crate::error::{data, domain, Error, Result};
use crate::sampling::{
    sample_bernoulli, standard_gamma, BetaParams, GaussianParams, NormalGammaParams, RngStream,
};

/// Rate substituted for a zero posterior rate when sampling a precision.
pub const BETA_FLOOR: f64 = 1e-12;

/// Default prior shape of TS14.
pub const TS14_DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    GaussianTs,
    VarTs,
    Ts14,
    Ts20,
    BernoulliTs,
    Ucb1,
    Ucb1Tuned,
    UcbV,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::GaussianTs,
        PolicyKind::VarTs,
        PolicyKind::Ts14,
        PolicyKind::Ts20,
        PolicyKind::BernoulliTs,
        PolicyKind::Ucb1,
        PolicyKind::Ucb1Tuned,
        PolicyKind::UcbV,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::GaussianTs => "gaussian_ts",
            PolicyKind::VarTs => "varts",
            PolicyKind::Ts14 => "ts14",
            PolicyKind::Ts20 => "ts20",
            PolicyKind::BernoulliTs => "bernoulli_ts",
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::Ucb1Tuned => "ucb1_tuned",
            PolicyKind::UcbV => "ucb_v",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| domain(format!("unknown policy kind `{s}`")))
    }
}

/// A fully parameterized agent.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Gaussian TS with a Gaussian prior on each mean and known reward variances.
    GaussianTs {
        prior: Vec<GaussianParams>,
        sigma2: Vec<f64>,
    },
    /// Normal-Gamma TS with per-arm priors.
    VarTs { prior: Vec<NormalGammaParams> },
    /// Likelihood-only Gaussian TS with unknown variance; two initial pulls per arm.
    Ts14 { alpha: f64 },
    /// Normal-Gamma TS with the fixed prior `(0, 0, 0.5, 0.5)`; one initial pull per arm.
    Ts20,
    /// Beta(1, 1) TS over Bernoulli-rounded rewards.
    BernoulliTs,
    Ucb1,
    Ucb1Tuned,
    UcbV(UcbVConstants),
}

impl PolicySpec {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::GaussianTs { .. } => PolicyKind::GaussianTs,
            PolicySpec::VarTs { .. } => PolicyKind::VarTs,
            PolicySpec::Ts14 { .. } => PolicyKind::Ts14,
            PolicySpec::Ts20 => PolicyKind::Ts20,
            PolicySpec::BernoulliTs => PolicyKind::BernoulliTs,
            PolicySpec::Ucb1 => PolicyKind::Ucb1,
            PolicySpec::Ucb1Tuned => PolicyKind::Ucb1Tuned,
            PolicySpec::UcbV(_) => PolicyKind::UcbV,
        }
    }

    /// Gaussian TS baseline: `N(0, 1)` prior and unit reward variances.
    pub fn gaussian_ts_baseline(arms: usize) -> Self {
        PolicySpec::GaussianTs {
            prior: vec![GaussianParams { mean: 0.0, variance: 1.0 }; arms],
            sigma2: vec![1.0; arms],
        }
    }

    /// VarTS configured with the fixed TS20 prior.
    pub fn varts_as_ts20(arms: usize) -> Self {
        PolicySpec::VarTs {
            prior: vec![TS20_PRIOR; arms],
        }
    }

    pub fn ts14() -> Self {
        PolicySpec::Ts14 {
            alpha: TS14_DEFAULT_ALPHA,
        }
    }
}

const TS20_PRIOR: NormalGammaParams = NormalGammaParams {
    mu0: 0.0,
    kappa0: 0.0,
    alpha0: 0.5,
    beta0: 0.5,
};

#[derive(Debug, Clone)]
enum Model {
    Gaussian {
        prior: Vec<GaussianParams>,
        sigma2: Vec<f64>,
    },
    NormalGamma {
        prior: Vec<NormalGammaParams>,
    },
    Bernoulli {
        successes: Vec<u64>,
        failures: Vec<u64>,
    },
    Ucb {
        kind: UcbKind,
        consts: UcbVConstants,
    },
}

/// Mutable state of one agent over one run.
#[derive(Debug, Clone)]
pub struct Policy {
    spec: PolicySpec,
    model: Model,
    stats: Vec<ArmStats>,
    min_pulls: u64,
    t: u64,
    scores: Vec<f64>,
}

impl Policy {
    pub fn new(spec: PolicySpec, arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(domain("policy needs K >= 1 arms"));
        }
        let check_len = |len: usize, what: &str| {
            if len == arms {
                Ok(())
            } else {
                Err(data(format!("{what} has {len} entries for {arms} arms")))
            }
        };
        let (model, min_pulls) = match &spec {
            PolicySpec::GaussianTs { prior, sigma2 } => {
                check_len(prior.len(), "gaussian_ts prior")?;
                check_len(sigma2.len(), "gaussian_ts reward variances")?;
                for p in prior {
                    p.validate()?;
                }
                if let Some(s) = sigma2.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
                    return Err(domain(format!("known reward variance must be > 0, got {s}")));
                }
                (
                    Model::Gaussian {
                        prior: prior.clone(),
                        sigma2: sigma2.clone(),
                    },
                    0,
                )
            }
            PolicySpec::VarTs { prior } => {
                check_len(prior.len(), "varts prior")?;
                for p in prior {
                    p.validate()?;
                }
                let forced = if prior.iter().any(|p| p.kappa0 == 0.0) { 1 } else { 0 };
                (Model::NormalGamma { prior: prior.clone() }, forced)
            }
            PolicySpec::Ts14 { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(domain(format!("ts14 prior shape must be > 0, got {alpha}")));
                }
                let prior = NormalGammaParams {
                    mu0: 0.0,
                    kappa0: 0.0,
                    alpha0: *alpha,
                    beta0: 0.0,
                };
                (Model::NormalGamma { prior: vec![prior; arms] }, 2)
            }
            PolicySpec::Ts20 => (Model::NormalGamma { prior: vec![TS20_PRIOR; arms] }, 1),
            PolicySpec::BernoulliTs => (
                Model::Bernoulli {
                    successes: vec![0; arms],
                    failures: vec![0; arms],
                },
                0,
            ),
            PolicySpec::Ucb1 => (ucb_model(UcbKind::Ucb1, UcbVConstants::default()), 1),
            PolicySpec::Ucb1Tuned => (ucb_model(UcbKind::Ucb1Tuned, UcbVConstants::default()), 1),
            PolicySpec::UcbV(consts) => {
                if !(consts.b > 0.0 && consts.zeta > 0.0) {
                    return Err(domain(format!("ucb_v needs b > 0 and zeta > 0, got {consts:?}")));
                }
                (ucb_model(UcbKind::UcbV, *consts), 1)
            }
        };
        Ok(Self {
            spec,
            model,
            stats: vec![ArmStats::default(); arms],
            min_pulls,
            t: 1,
            scores: vec![0.0; arms],
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn arms(&self) -> usize {
        self.stats.len()
    }

    /// Current round: observations so far plus one.
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }

    /// Beta posterior counts `(successes, failures)` of Bernoulli TS.
    pub fn bernoulli_counts(&self) -> Option<(&[u64], &[u64])> {
        match &self.model {
            Model::Bernoulli { successes, failures } => Some((successes, failures)),
            _ => None,
        }
    }

    /// Minimum pulls per arm before the agent's own rule takes over.
    pub fn forced_pulls(&self) -> u64 {
        self.min_pulls
    }

    fn forced_arm(&self) -> Option<usize> {
        if self.min_pulls == 0 {
            return None;
        }
        let (i, s) = self
            .stats
            .iter()
            .enumerate()
            .min_by_key(|(i, s)| (s.count, *i))
            .expect("at least one arm");
        (s.count < self.min_pulls).then_some(i)
    }

    pub fn select_arm(&mut self, rng: &mut RngStream) -> Result<Arm> {
        if self.arms() == 1 {
            return Ok(Arm::from_index(0));
        }
        if let Some(i) = self.forced_arm() {
            return Ok(Arm::from_index(i));
        }
        self.fill_scores(rng)?;
        Ok(Arm::from_index(argmax_with_ties(&self.scores, rng)))
    }

    fn fill_scores(&mut self, rng: &mut RngStream) -> Result<()> {
        let Self {
            model,
            stats,
            scores,
            t,
            ..
        } = self;
        match model {
            Model::Gaussian { prior, sigma2 } => {
                for (i, score) in scores.iter_mut().enumerate() {
                    let (mean, variance) = gaussian_ts_posterior(prior[i], sigma2[i], &stats[i])?;
                    *score = GaussianParams { mean, variance }.sample(rng)?;
                }
            }
            Model::NormalGamma { prior } => {
                for (i, score) in scores.iter_mut().enumerate() {
                    let post = varts_posterior(prior[i], &stats[i])?;
                    *score = sample_posterior_mean(&post, rng)?;
                }
            }
            Model::Bernoulli { successes, failures } => {
                for (i, score) in scores.iter_mut().enumerate() {
                    let beta = BetaParams {
                        a: 1.0 + successes[i] as f64,
                        b: 1.0 + failures[i] as f64,
                    };
                    *score = beta.sample(rng)?;
                }
            }
            Model::Ucb { kind, consts } => {
                let ln_t = (*t as f64).ln();
                for (score, s) in scores.iter_mut().zip(stats.iter()) {
                    *score = ucb_index_ln(*kind, s, ln_t, *consts);
                }
            }
        }
        Ok(())
    }

    pub fn observe(&mut self, arm: Arm, reward: f64, rng: &mut RngStream) -> Result<()> {
        let i = arm.index();
        if i >= self.arms() {
            return Err(Error::Index {
                arm: arm.number(),
                arms: self.arms(),
            });
        }
        if !reward.is_finite() {
            return Err(data(format!("reward must be finite, got {reward}")));
        }
        if let Model::Bernoulli { successes, failures } = &mut self.model {
            let rounded = sample_bernoulli(reward.clamp(0.0, 1.0), rng)?;
            if rounded == 1.0 {
                successes[i] += 1;
            } else {
                failures[i] += 1;
            }
        }
        self.stats[i].push(reward);
        self.t += 1;
        Ok(())
    }
}

fn ucb_model(kind: UcbKind, consts: UcbVConstants) -> Model {
    Model::Ucb { kind, consts }
}

/// Draws `lambda ~ Gam(alpha, beta)` then `N(mu_hat, 1 / (kappa lambda))`.
///
/// A zero rate is replaced by [`BETA_FLOOR`], and a precision that underflows
/// to zero is raised to the smallest positive normal value.
pub fn sample_posterior_mean(post: &VarTsPosterior, rng: &mut RngStream) -> Result<f64> {
    let rate = if post.beta > 0.0 { post.beta } else { BETA_FLOOR };
    if !(post.alpha > 0.0 && post.kappa > 0.0 && rate.is_finite()) {
        return Err(domain(format!("cannot sample from posterior {post:?}")));
    }
    let precision = (standard_gamma(post.alpha, rng) / rate).max(f64::MIN_POSITIVE);
    let sd = 1.0 / (post.kappa.sqrt() * precision.sqrt());
    let draw = post.mu_hat + sd * rng.standard_normal();
    if draw.is_finite() {
        Ok(draw)
    } else {
        Err(Error::Numeric(format!("posterior sample not finite for {post:?}")))
    }
}

/// Index of the largest score; ties are broken uniformly at random.
///
/// The stream is consumed only when a tie is actually encountered.
pub fn argmax_with_ties(scores: &[f64], rng: &mut RngStream) -> usize {
    let mut best = 0;
    let mut ties = 1u32;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
            ties = 1;
        } else if *s == scores[best] {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = i;
            }
        }
    }
    best
}
