//! Posterior of the shared parameter in three-level Bayesian multi-task linear
//! regression:
//!
//! ```text
//! theta0          ~ N(mu0, Lambda0^-1)
//! theta_t | theta0 ~ N(theta0, Sigma)               t = 1..T
//! y_t | theta_t    ~ N(X_t theta_t, sigma2 I)
//! ```
//!
//! Two routes compute `theta0 | data ~ N(mu_T, Lambda_T^-1)`. The direct route
//! factors the `N x N` marginal covariance `sigma2 I + X Sigma X^T` of every task;
//! the Woodbury route works only with `K x K` matrices built from `S = X^T X` and
//! `c = X^T y`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{data, domain, Error, Result};

/// Largest eigenvalue ratio accepted for `Sigma` in the Woodbury route.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct HierPrior {
    pub mu0: DVector<f64>,
    pub lambda0: DMatrix<f64>,
}

impl HierPrior {
    pub fn new(mu0: DVector<f64>, lambda0: DMatrix<f64>) -> Result<Self> {
        let k = mu0.len();
        if k == 0 || lambda0.shape() != (k, k) {
            return Err(data(format!(
                "prior mean has length {k} but precision is {:?}",
                lambda0.shape()
            )));
        }
        check_spd(&lambda0, "prior precision")?;
        Ok(Self { mu0, lambda0 })
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl TaskData {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.nrows() != y.len() {
            return Err(data(format!(
                "task has {} feature rows and {} targets",
                x.nrows(),
                y.len()
            )));
        }
        Ok(Self { x, y })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierPosterior {
    pub mu: DVector<f64>,
    pub lambda: DMatrix<f64>,
}

impl HierPosterior {
    pub fn covariance_trace(&self) -> Result<f64> {
        let chol = cholesky(&self.lambda, "posterior precision")?;
        Ok(chol.inverse().trace())
    }
}

fn check_spd(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(domain(format!("{what} is not symmetric")));
    }
    let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(domain(format!("{what} is not positive definite (min eigenvalue {min_eig})")));
    }
    Ok(())
}

fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::Numeric(format!("{what} is not positive definite")))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn check_inputs(prior: &HierPrior, sigma: &DMatrix<f64>, sigma2: f64, tasks: &[TaskData]) -> Result<()> {
    let k = prior.dim();
    if sigma.shape() != (k, k) {
        return Err(data(format!("Sigma is {:?}, expected {k}x{k}", sigma.shape())));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(domain(format!("noise variance must be > 0, got {sigma2}")));
    }
    check_spd(sigma, "Sigma")?;
    for (t, task) in tasks.iter().enumerate() {
        if task.x.ncols() != k || task.x.nrows() != task.y.len() {
            return Err(data(format!(
                "task {t} has X {:?} and y of length {}; expected {k} columns",
                task.x.shape(),
                task.y.len()
            )));
        }
    }
    Ok(())
}

/// Posterior after each prefix of `tasks` via the per-task `N x N` recurrence
///
/// ```text
/// M_t      = sigma2 I + X_t Sigma X_t^T
/// Lambda_t = Lambda_{t-1} + X_t^T M_t^-1 X_t
/// mu_t     = Lambda_t^-1 (Lambda_{t-1} mu_{t-1} + X_t^T M_t^-1 y_t)
/// ```
///
/// Entry 0 is the prior itself.
pub fn posterior_direct_path(
    prior: &HierPrior,
    sigma: &DMatrix<f64>,
    sigma2: f64,
    tasks: &[TaskData],
) -> Result<Vec<HierPosterior>> {
    check_inputs(prior, sigma, sigma2, tasks)?;
    let mut path = Vec::with_capacity(tasks.len() + 1);
    let mut current = HierPosterior {
        mu: prior.mu0.clone(),
        lambda: prior.lambda0.clone(),
    };
    path.push(current.clone());
    for task in tasks {
        let n = task.x.nrows();
        let mut marginal = &task.x * sigma * task.x.transpose();
        for i in 0..n {
            marginal[(i, i)] += sigma2;
        }
        symmetrize(&mut marginal);
        let chol = cholesky(&marginal, "task marginal covariance")?;
        let weighted_x = chol.solve(&task.x);
        let weighted_y = chol.solve(&task.y);

        let mut lambda = &current.lambda + task.x.transpose() * weighted_x;
        symmetrize(&mut lambda);
        let rhs = &current.lambda * &current.mu + task.x.transpose() * weighted_y;
        let mu = cholesky(&lambda, "posterior precision")?.solve(&rhs);
        current = HierPosterior { mu, lambda };
        path.push(current.clone());
    }
    Ok(path)
}

pub fn posterior_direct(
    prior: &HierPrior,
    sigma: &DMatrix<f64>,
    sigma2: f64,
    tasks: &[TaskData],
) -> Result<HierPosterior> {
    Ok(posterior_direct_path(prior, sigma, sigma2, tasks)?
        .pop()
        .expect("path contains the prior"))
}

/// Streaming Woodbury form. Keeps the precision `Lambda_t` and the information
/// vector `h_t = Lambda_t mu_t`; each task adds
///
/// ```text
/// Lambda += S/s2 - (S/s2) (Sigma^-1 + S/s2)^-1 (S/s2)
/// h      += c/s2 - (S/s2) (Sigma^-1 + S/s2)^-1 (c/s2)
/// ```
#[derive(Debug, Clone)]
pub struct WoodburyAccumulator {
    sigma_inv: DMatrix<f64>,
    sigma2: f64,
    lambda: DMatrix<f64>,
    info: DVector<f64>,
}

impl WoodburyAccumulator {
    pub fn new(prior: &HierPrior, sigma: &DMatrix<f64>, sigma2: f64) -> Result<Self> {
        check_inputs(prior, sigma, sigma2, &[])?;
        let eig = sigma.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if !(lo > 0.0) || hi / lo > MAX_CONDITION {
            return Err(Error::Conditioning(format!(
                "Sigma eigenvalues span [{lo:e}, {hi:e}]"
            )));
        }
        let mut sigma_inv = cholesky(sigma, "Sigma")
            .map_err(|_| Error::Conditioning("Sigma is numerically singular".into()))?
            .inverse();
        symmetrize(&mut sigma_inv);
        Ok(Self {
            sigma_inv,
            sigma2,
            info: &prior.lambda0 * &prior.mu0,
            lambda: prior.lambda0.clone(),
        })
    }

    pub fn push(&mut self, task: &TaskData) -> Result<()> {
        let k = self.lambda.nrows();
        if task.x.ncols() != k || task.x.nrows() != task.y.len() {
            return Err(data(format!("task X {:?} does not match dimension {k}", task.x.shape())));
        }
        let s = task.x.transpose() * &task.x / self.sigma2;
        let c = task.x.transpose() * &task.y / self.sigma2;
        let mut inner = &self.sigma_inv + &s;
        symmetrize(&mut inner);
        let chol = cholesky(&inner, "Sigma^-1 + S / sigma2")?;
        let solved_s = chol.solve(&s);
        let solved_c = chol.solve(&c);
        self.lambda += &s - &s * solved_s;
        symmetrize(&mut self.lambda);
        self.info += &c - &s * solved_c;
        Ok(())
    }

    pub fn posterior(&self) -> Result<HierPosterior> {
        let mu = cholesky(&self.lambda, "posterior precision")?.solve(&self.info);
        Ok(HierPosterior {
            mu,
            lambda: self.lambda.clone(),
        })
    }
}

pub fn posterior_woodbury(
    prior: &HierPrior,
    sigma: &DMatrix<f64>,
    sigma2: f64,
    tasks: &[TaskData],
) -> Result<HierPosterior> {
    check_inputs(prior, sigma, sigma2, tasks)?;
    let mut acc = WoodburyAccumulator::new(prior, sigma, sigma2)?;
    for task in tasks {
        acc.push(task)?;
    }
    if tasks.is_empty() {
        return Ok(HierPosterior {
            mu: prior.mu0.clone(),
            lambda: prior.lambda0.clone(),
        });
    }
    acc.posterior()
}
