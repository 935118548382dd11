//! Bayes regret upper bounds for Gaussian TS (known variances) and VarTS
//! (unknown variances), plus the summation inequalities used to derive them.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::sampling::NormalGammaParams;

fn check_common(horizon: u64, delta: f64, arms: usize) -> Result<()> {
    if horizon < 1 {
        return Err(domain("bound needs horizon >= 1"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    if arms == 0 {
        return Err(domain("bound needs K >= 1 arms"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownVarianceInputs {
    pub horizon: u64,
    pub delta: f64,
    /// Prior variances of the arm means.
    pub prior_var: Vec<f64>,
    /// Known reward variances.
    pub sigma2: Vec<f64>,
}

/// `sum_i sqrt(2 s0_i / pi) n delta
///   + sqrt(2n) sqrt(sum_i s_i (log(1 + n s0_i / s_i) + s0_i / s_i) log(1/delta))`
pub fn bound_known_variance(inputs: &KnownVarianceInputs) -> Result<f64> {
    let KnownVarianceInputs {
        horizon,
        delta,
        prior_var,
        sigma2,
    } = inputs;
    check_common(*horizon, *delta, prior_var.len())?;
    if prior_var.len() != sigma2.len() {
        return Err(Error::Data(format!(
            "{} prior variances but {} reward variances",
            prior_var.len(),
            sigma2.len()
        )));
    }
    if prior_var.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(domain("prior variances must be finite and >= 0"));
    }
    if sigma2.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(domain("reward variances must be finite and > 0"));
    }
    let n = *horizon as f64;
    let tail: f64 = prior_var.iter().map(|v0| (2.0 * v0 / PI).sqrt()).sum::<f64>() * n * delta;
    let inner: f64 = prior_var
        .iter()
        .zip(sigma2)
        .map(|(v0, s)| {
            let ratio = v0 / s;
            s * ((n * ratio).ln_1p() + ratio)
        })
        .sum();
    let log_inv_delta = -delta.ln();
    Ok(tail + (2.0 * n).sqrt() * (inner * log_inv_delta).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownVarianceInputs {
    pub horizon: u64,
    pub delta: f64,
    pub prior: Vec<NormalGammaParams>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownVarianceBound {
    pub c: f64,
    pub bound: f64,
}

fn check_unknown(inputs: &UnknownVarianceInputs) -> Result<()> {
    check_common(inputs.horizon, inputs.delta, inputs.prior.len())?;
    for p in &inputs.prior {
        p.validate()?;
        if !(p.alpha0 > 1.0) {
            return Err(Error::UndefinedBound(format!(
                "alpha0 must exceed 1 (the constant diverges at alpha0 = 1), got {}",
                p.alpha0
            )));
        }
        if !(p.kappa0 > 0.0 && p.beta0 > 0.0) {
            return Err(Error::UndefinedBound(format!(
                "kappa0 and beta0 must be > 0, got {} and {}",
                p.kappa0, p.beta0
            )));
        }
    }
    Ok(())
}

/// `C^2 = sum_i beta0/(alpha0-1) * (2/kappa0 + 0.5/(kappa0 (alpha0-1)) + 5 log(1 + n/kappa0))`.
pub fn c_squared(inputs: &UnknownVarianceInputs) -> Result<f64> {
    check_unknown(inputs)?;
    let n = inputs.horizon as f64;
    Ok(inputs
        .prior
        .iter()
        .map(|p| {
            let a1 = p.alpha0 - 1.0;
            p.beta0 / a1 * (2.0 / p.kappa0 + 0.5 / (p.kappa0 * a1) + 5.0 * (n / p.kappa0).ln_1p())
        })
        .sum())
}

/// The same constant regrouped as
/// `(4 beta0 + beta0/(alpha0-1)) / (2 kappa0 (alpha0-1)) + 5 beta0 log(1 + n/kappa0) / (alpha0-1)`.
pub fn c_squared_regrouped(inputs: &UnknownVarianceInputs) -> Result<f64> {
    check_unknown(inputs)?;
    let n = inputs.horizon as f64;
    Ok(inputs
        .prior
        .iter()
        .map(|p| {
            let a1 = p.alpha0 - 1.0;
            (4.0 * p.beta0 + p.beta0 / a1) / (2.0 * p.kappa0 * a1)
                + 5.0 * p.beta0 * (n / p.kappa0).ln_1p() / a1
        })
        .sum())
}

/// `C sqrt(n log(1/delta)) + delta C sqrt(n K / (2 pi))`.
pub fn bound_unknown_variance(inputs: &UnknownVarianceInputs) -> Result<UnknownVarianceBound> {
    let c = c_squared(inputs)?.sqrt();
    let n = inputs.horizon as f64;
    let k = inputs.prior.len() as f64;
    let bound = c * (n * -inputs.delta.ln()).sqrt() + inputs.delta * c * (n * k / (2.0 * PI)).sqrt();
    Ok(UnknownVarianceBound { c, bound })
}

/// Both sides of `sum_{i=1}^n 1/(i+a) <= log(1 + n/a)` and
/// `sum_{i=1}^n 1/sqrt(i+a) <= 2 (sqrt(n+a) - sqrt(a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSums {
    pub lhs_sum: f64,
    pub rhs_log: f64,
    pub lhs_root_sum: f64,
    pub rhs_root: f64,
}

impl LemmaSums {
    pub fn holds(&self) -> bool {
        self.lhs_sum <= self.rhs_log && self.lhs_root_sum <= self.rhs_root
    }
}

pub fn lemma_sum_checks(n: u64, a: f64) -> Result<LemmaSums> {
    if n < 1 || !(a > 0.0 && a.is_finite()) {
        return Err(domain(format!("lemma sums need n >= 1 and a > 0, got ({n}, {a})")));
    }
    // Smallest terms first.
    let (mut lhs_sum, mut lhs_root_sum) = (0.0, 0.0);
    for i in (1..=n).rev() {
        let x = i as f64 + a;
        lhs_sum += 1.0 / x;
        lhs_root_sum += 1.0 / x.sqrt();
    }
    let nf = n as f64;
    Ok(LemmaSums {
        lhs_sum,
        rhs_log: (nf / a).ln_1p(),
        lhs_root_sum,
        // 2 (sqrt(n+a) - sqrt(a)) without cancellation.
        rhs_root: 2.0 * nf / ((nf + a).sqrt() + a.sqrt()),
    })
}
