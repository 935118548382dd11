//! Seedable random streams and the handful of samplers the simulator needs.
//!
//! Every stream is identified by a root seed and a derivation path. The
//! generator key is the SHA-256 digest of `(root_seed, path)`, so a stream's
//! output depends only on its identity and never on how much its parent or
//! siblings have consumed. Distinct paths give distinct ChaCha keys.

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};

const STREAM_TAG: &[u8] = b"bandit-lab/stream/v1";

/// A deterministic random stream addressed by `(root_seed, path)`.
#[derive(Debug)]
pub struct RngStream {
    root_seed: u64,
    path: Vec<u64>,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(root_seed: u64) -> Self {
        Self::at(root_seed, Vec::new())
    }

    fn at(root_seed: u64, path: Vec<u64>) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(STREAM_TAG);
        hasher.update(root_seed.to_le_bytes());
        hasher.update((path.len() as u64).to_le_bytes());
        for index in &path {
            hasher.update(index.to_le_bytes());
        }
        let key: [u8; 32] = hasher.finalize().into();
        Self {
            root_seed,
            path,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Child stream `index` of this stream. Independent of this stream's position.
    pub fn derive(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::at(self.root_seed, path)
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        self.sample(Open01)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numeric(format!("{what} sample is not finite ({value})")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        let params = Self { mean, variance };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !self.variance.is_finite() || self.variance < 0.0 {
            return Err(domain(format!(
                "gaussian needs finite mean and variance >= 0, got ({}, {})",
                self.mean, self.variance
            )));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.validate()?;
        if self.variance == 0.0 {
            return Ok(self.mean);
        }
        finite(
            self.mean + self.variance.sqrt() * rng.standard_normal(),
            "gaussian",
        )
    }
}

/// Gamma distribution in the shape/rate parameterization: mean `shape / rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        let params = Self { shape, rate };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape > 0.0 && self.shape.is_finite() && self.rate > 0.0 && self.rate.is_finite()) {
            return Err(domain(format!(
                "gamma needs shape > 0 and rate > 0, got ({}, {})",
                self.shape, self.rate
            )));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.validate()?;
        finite(standard_gamma(self.shape, rng) / self.rate, "gamma")
    }
}

/// Marsaglia-Tsang squeeze/rejection sampler for Gamma(shape, 1).
///
/// Shapes below one use the boost `G(shape) = G(shape + 1) * U^(1/shape)`.
/// For very small shapes the boost factor underflows and the draw is `0.0`.
pub(crate) fn standard_gamma(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let boosted = standard_gamma(shape + 1.0, rng);
        return boosted * rng.open01().powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let params = Self { a, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite() && self.b > 0.0 && self.b.is_finite()) {
            return Err(domain(format!(
                "beta needs a > 0 and b > 0, got ({}, {})",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    /// Draws `G_a / (G_a + G_b)` from two independent unit-rate Gamma draws.
    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.validate()?;
        let x = standard_gamma(self.a, rng);
        let y = standard_gamma(self.b, rng);
        finite(x / (x + y), "beta")
    }
}

pub fn sample_bernoulli(p: f64, rng: &mut RngStream) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("bernoulli needs p in [0, 1], got {p}")));
    }
    let u: f64 = rng.random();
    Ok(if u < p { 1.0 } else { 0.0 })
}

/// One of the scalar distributions the simulator draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Gaussian(GaussianParams),
    Gamma(GammaParams),
    Beta(BetaParams),
    Bernoulli(f64),
}

impl Dist {
    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        match self {
            Dist::Gaussian(p) => p.sample(rng),
            Dist::Gamma(p) => p.sample(rng),
            Dist::Beta(p) => p.sample(rng),
            Dist::Bernoulli(p) => sample_bernoulli(*p, rng),
        }
    }
}

/// Normal-Gamma hyper-parameters over `(mean, precision)`.
///
/// `kappa0 = 0` and `beta0 = 0` are representable because the frequentist-style
/// Thompson sampling variants use them; such priors cannot be sampled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalGammaParams {
    pub mu0: f64,
    pub kappa0: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl NormalGammaParams {
    pub fn new(mu0: f64, kappa0: f64, alpha0: f64, beta0: f64) -> Result<Self> {
        let params = Self {
            mu0,
            kappa0,
            alpha0,
            beta0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.mu0, self.kappa0, self.alpha0, self.beta0]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.kappa0 < 0.0 || self.alpha0 <= 0.0 || self.beta0 < 0.0 {
            return Err(domain(format!(
                "normal-gamma needs kappa0 >= 0, alpha0 > 0, beta0 >= 0, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.kappa0 == 0.0 || self.beta0 == 0.0
    }

    /// Draws `(mean, precision)`: precision from `Gam(alpha0, beta0)`, then the
    /// mean from `N(mu0, 1 / (kappa0 * precision))`.
    pub fn sample(&self, rng: &mut RngStream) -> Result<(f64, f64)> {
        self.validate()?;
        if self.is_degenerate() {
            return Err(Error::DegeneratePrior(format!(
                "cannot sample normal-gamma with kappa0 = {} and beta0 = {}",
                self.kappa0, self.beta0
            )));
        }
        let precision = GammaParams::new(self.alpha0, self.beta0)?.sample(rng)?;
        if precision <= 0.0 {
            return Err(Error::Numeric(
                "sampled precision underflowed to zero".to_string(),
            ));
        }
        let sd = 1.0 / (self.kappa0.sqrt() * precision.sqrt());
        let mean = finite(self.mu0 + sd * rng.standard_normal(), "normal-gamma mean")?;
        Ok((mean, precision))
    }

    /// Prior mean of the reward variance, `beta0 / (alpha0 - 1)`.
    pub fn mean_variance(&self) -> Result<f64> {
        inverse_gamma_mean(self.alpha0, self.beta0)
    }

    /// Marginal variance of the sampled mean, `beta0 / (kappa0 (alpha0 - 1))`.
    pub fn marginal_mean_variance(&self) -> Result<f64> {
        if !(self.kappa0 > 0.0) {
            return Err(Error::UndefinedMoment("marginal mean variance needs kappa0 > 0".into()));
        }
        Ok(self.mean_variance()? / self.kappa0)
    }
}

/// `E[1/X]` for `X ~ Gam(alpha, beta)`, which is `beta / (alpha - 1)`.
pub fn inverse_gamma_mean(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::UndefinedMoment(format!(
            "E[1/X] requires alpha > 1, got {alpha}"
        )));
    }
    if !(beta > 0.0) || !beta.is_finite() || !alpha.is_finite() {
        return Err(domain(format!("inverse-gamma mean needs beta > 0, got {beta}")));
    }
    Ok(beta / (alpha - 1.0))
}
