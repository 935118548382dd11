//! Bayesian multi-armed bandits with heterogeneous reward variances.
//!
//! Environments draw per-arm means and variances from a prior, policies pick
//! arms from running statistics, and the runner estimates Bayes regret by Monte
//! Carlo with deterministic, schedule-independent random streams. Closed-form
//! regret bounds, a method-of-moments prior fit and a hierarchical linear
//! regression posterior complete the toolkit.

pub mod bounds;
pub mod envs;
pub mod error;
pub mod hier_reg;
pub mod policies;
pub mod prior_fit;
pub mod runner;
pub mod sampling;

pub use envs::{make_env_spec, Arm, BanditInstance, EnvKind, EnvKindName, EnvSpec};
pub use error::{Error, Result};
pub use policies::{ArmStats, Policy, PolicyKind, PolicySpec, UcbVConstants};
pub use prior_fit::FitMode;
pub use runner::{AggregateCurve, ExperimentConfig, NamedPolicy, RegretTrajectory};
pub use sampling::{BetaParams, GammaParams, GaussianParams, NormalGammaParams, RngStream};
