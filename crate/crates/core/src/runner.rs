//! Monte-Carlo estimation of Bayes regret.
//!
//! Stream layout for a root seed `s`:
//!
//! ```text
//! s / 0 / r          episode stream of run r (shared by every policy)
//!   .. / 0           instance draw
//!   .. / 1           policy randomness
//!   .. / 2 / i       rewards of arm i (the j-th pull of arm i reads the j-th draw)
//! s / 1              prior fitting
//! ```
//!
//! Every policy therefore meets the same instance and the same per-arm reward
//! tape in run `r`. Runs are evaluated in fixed-size blocks and folded into the
//! aggregate in run order, so the output does not depend on the worker count.

use rayon::prelude::*;

use crate::envs::{Arm, EnvSpec};
use crate::error::{data, domain, Error, Result};
use crate::policies::{Policy, PolicySpec};
use crate::sampling::RngStream;

const RUNS_DOMAIN: u64 = 0;
const PRIOR_FIT_DOMAIN: u64 = 1;
const INSTANCE_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;
const REWARD_STREAM: u64 = 2;
const BLOCK: u64 = 64;

/// Stream used to fit data-driven priors for a given root seed.
pub fn prior_fit_stream(root_seed: u64) -> RngStream {
    RngStream::new(root_seed).derive(PRIOR_FIT_DOMAIN)
}

/// Episode stream of run `run`.
pub fn run_stream(root_seed: u64, run: u64) -> RngStream {
    RngStream::new(root_seed).derive(RUNS_DOMAIN).derive(run)
}

/// Anything that can play a bandit: pick an arm, then learn from its reward.
pub trait Agent {
    fn select_arm(&mut self, rng: &mut RngStream) -> Result<Arm>;
    fn observe(&mut self, arm: Arm, reward: f64, rng: &mut RngStream) -> Result<()>;
}

impl Agent for Policy {
    fn select_arm(&mut self, rng: &mut RngStream) -> Result<Arm> {
        Policy::select_arm(self, rng)
    }

    fn observe(&mut self, arm: Arm, reward: f64, rng: &mut RngStream) -> Result<()> {
        Policy::observe(self, arm, reward, rng)
    }
}

/// Cumulative pseudo-regret after each round.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrajectory {
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub rounds: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: u64,
}

impl AggregateCurve {
    pub fn final_mean(&self) -> f64 {
        *self.mean_regret.last().expect("non-empty curve")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().expect("non-empty curve")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPolicy {
    pub name: String,
    pub spec: PolicySpec,
}

impl NamedPolicy {
    pub fn new(name: impl Into<String>, spec: PolicySpec) -> Self {
        Self {
            name: name.into(),
            spec,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub policies: Vec<NamedPolicy>,
    pub horizon: usize,
    pub runs: u64,
    pub root_seed: u64,
    pub record_every: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(domain("horizon must be >= 1"));
        }
        if self.runs < 1 {
            return Err(domain("runs must be >= 1"));
        }
        if self.record_every < 1 {
            return Err(domain("record_every must be >= 1"));
        }
        if self.policies.is_empty() {
            return Err(data("experiment needs at least one policy"));
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].iter().any(|q| q.name == p.name) {
                return Err(data(format!("duplicate policy name `{}`", p.name)));
            }
            Policy::new(p.spec.clone(), self.env.arms())?;
        }
        Ok(())
    }
}

/// Rounds (1-based) kept in the output: every `record_every`-th plus the last.
pub fn recorded_rounds(horizon: usize, record_every: usize) -> Vec<usize> {
    let mut rounds: Vec<usize> = (record_every..=horizon).step_by(record_every.max(1)).collect();
    if rounds.last() != Some(&horizon) {
        rounds.push(horizon);
    }
    rounds
}

/// Plays `agent` on an instance drawn from `env` for `horizon` rounds.
pub fn play<A: Agent>(
    agent: &mut A,
    env: &EnvSpec,
    horizon: usize,
    rng: &RngStream,
) -> Result<RegretTrajectory> {
    let instance = env.sample_instance(&mut rng.derive(INSTANCE_STREAM))?;
    let mut policy_rng = rng.derive(POLICY_STREAM);
    let reward_root = rng.derive(REWARD_STREAM);
    let mut reward_rngs: Vec<RngStream> =
        (0..instance.arms() as u64).map(|i| reward_root.derive(i)).collect();
    let (_, best) = instance.optimum();

    let mut cumulative = Vec::with_capacity(horizon);
    let mut total = 0.0;
    for _ in 0..horizon {
        let arm = agent.select_arm(&mut policy_rng)?;
        if arm.index() >= instance.arms() {
            return Err(Error::Index {
                arm: arm.number(),
                arms: instance.arms(),
            });
        }
        let reward = env.sample_reward(&instance, arm, &mut reward_rngs[arm.index()])?;
        agent.observe(arm, reward, &mut policy_rng)?;
        total += best - instance.mu[arm.index()];
        cumulative.push(total);
    }
    Ok(RegretTrajectory { cumulative })
}

pub fn run_episode(
    policy: &PolicySpec,
    env: &EnvSpec,
    horizon: usize,
    rng: &RngStream,
) -> Result<RegretTrajectory> {
    let mut agent = Policy::new(policy.clone(), env.arms())?;
    play(&mut agent, env, horizon, rng)
}

/// One-pass mean and sum of squared deviations per recorded round.
#[derive(Debug, Clone)]
struct CurveAccumulator {
    rounds: Vec<usize>,
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl CurveAccumulator {
    fn new(rounds: Vec<usize>) -> Self {
        let n = rounds.len();
        Self {
            rounds,
            count: 0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for ((m, s), x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let delta = x - *m;
            *m += delta / c;
            *s += delta * (x - *m);
        }
    }

    fn finish(self) -> AggregateCurve {
        let n = self.count as f64;
        let stderr = self
            .m2
            .iter()
            .map(|s| {
                if self.count < 2 {
                    0.0
                } else {
                    (s.max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
                }
            })
            .collect();
        AggregateCurve {
            rounds: self.rounds,
            mean_regret: self.mean,
            stderr,
            runs: self.count,
        }
    }
}

fn pick(trajectory: &RegretTrajectory, rounds: &[usize]) -> Vec<f64> {
    rounds.iter().map(|r| trajectory.cumulative[r - 1]).collect()
}

/// Per-round mean and standard error across trajectories.
pub fn aggregate(trajectories: &[RegretTrajectory], record_every: usize) -> Result<AggregateCurve> {
    let first = trajectories
        .first()
        .ok_or_else(|| data("cannot aggregate zero trajectories"))?;
    if record_every < 1 {
        return Err(domain("record_every must be >= 1"));
    }
    let horizon = first.cumulative.len();
    if horizon == 0 || trajectories.iter().any(|t| t.cumulative.len() != horizon) {
        return Err(data("trajectories must be non-empty and of equal length"));
    }
    let rounds = recorded_rounds(horizon, record_every);
    let mut acc = CurveAccumulator::new(rounds);
    for t in trajectories {
        let values = pick(t, &acc.rounds);
        acc.push(&values);
    }
    Ok(acc.finish())
}

/// Runs every policy for `config.runs` episodes using up to `workers` threads.
///
/// Returns one curve per policy in configuration order. Output is identical for
/// any `workers >= 1`.
pub fn run_experiment(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<Vec<(String, AggregateCurve)>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
    let rounds = recorded_rounds(config.horizon, config.record_every);

    config
        .policies
        .iter()
        .map(|named| {
            let mut acc = CurveAccumulator::new(rounds.clone());
            let mut start = 0;
            while start < config.runs {
                let end = (start + BLOCK).min(config.runs);
                let block: Vec<Result<Vec<f64>>> = pool.install(|| {
                    (start..end)
                        .into_par_iter()
                        .map(|run| {
                            let rng = run_stream(config.root_seed, run);
                            run_episode(&named.spec, &config.env, config.horizon, &rng)
                                .map(|t| pick(&t, &rounds))
                                .map_err(|e| Error::Episode {
                                    run,
                                    policy: named.name.clone(),
                                    source: Box::new(e),
                                })
                        })
                        .collect()
                });
                for values in block {
                    acc.push(&values?);
                }
                start = end;
            }
            Ok((named.name.clone(), acc.finish()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_env_spec, EnvKind, EnvKindName};
    use crate::sampling::GaussianParams;

    struct Fixed(usize);

    impl Agent for Fixed {
        fn select_arm(&mut self, _rng: &mut RngStream) -> Result<Arm> {
            Ok(Arm::new(self.0).unwrap())
        }

        fn observe(&mut self, _arm: Arm, _reward: f64, _rng: &mut RngStream) -> Result<()> {
            Ok(())
        }
    }

    fn fixed_env(mu: &[f64]) -> EnvSpec {
        EnvSpec::new(EnvKind::GaussianKnownVar {
            prior: mu.iter().map(|m| GaussianParams::new(*m, 0.0).unwrap()).collect(),
            sigma2: vec![1.0; mu.len()],
        })
        .unwrap()
    }

    #[test]
    fn single_arm_has_zero_regret() {
        let env = make_env_spec(EnvKindName::Bernoulli, 1).unwrap();
        let t = run_episode(&PolicySpec::Ucb1, &env, 50, &RngStream::new(1)).unwrap();
        assert!(t.cumulative.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn stub_policies() {
        let env = fixed_env(&[1.0, 0.0]);
        let t = play(&mut Fixed(2), &env, 20, &RngStream::new(2)).unwrap();
        let expected: Vec<f64> = (1..=20).map(|t| t as f64).collect();
        assert_eq!(t.cumulative, expected);
        let t = play(&mut Fixed(1), &env, 20, &RngStream::new(2)).unwrap();
        assert!(t.cumulative.iter().all(|r| *r == 0.0));
        assert!(matches!(
            play(&mut Fixed(3), &env, 5, &RngStream::new(2)),
            Err(Error::Index { arm: 3, arms: 2 })
        ));
    }

    #[test]
    fn aggregate_examples() {
        let one = RegretTrajectory { cumulative: vec![0.0, 1.0, 3.0] };
        let c = aggregate(std::slice::from_ref(&one), 1).unwrap();
        assert_eq!(c.mean_regret, one.cumulative);
        assert_eq!(c.stderr, vec![0.0; 3]);

        let a = RegretTrajectory { cumulative: vec![0.0, 2.0] };
        let b = RegretTrajectory { cumulative: vec![0.0, 0.0] };
        let c = aggregate(&[a, b], 1).unwrap();
        assert_eq!(c.mean_regret, vec![0.0, 1.0]);
        assert_eq!(c.stderr, vec![0.0, 1.0]);
        assert_eq!(c.rounds, vec![1, 2]);

        let same = vec![RegretTrajectory { cumulative: vec![0.5, 0.75] }; 1000];
        let c = aggregate(&same, 1).unwrap();
        assert_eq!(c.stderr, vec![0.0, 0.0]);

        assert!(matches!(aggregate(&[], 1), Err(Error::Data(_))));
    }

    #[test]
    fn recorded_round_grid() {
        assert_eq!(recorded_rounds(10, 3), vec![3, 6, 9, 10]);
        assert_eq!(recorded_rounds(9, 3), vec![3, 6, 9]);
        assert_eq!(recorded_rounds(2, 5), vec![2]);
        for n in 1..40 {
            for every in 1..12 {
                assert_eq!(recorded_rounds(n, every).len(), n.div_ceil(every));
            }
        }
    }

    fn small_config(policies: Vec<NamedPolicy>, runs: u64) -> ExperimentConfig {
        ExperimentConfig {
            env: make_env_spec(EnvKindName::Bernoulli, 3).unwrap(),
            policies,
            horizon: 40,
            runs,
            root_seed: 99,
            record_every: 1,
        }
    }

    #[test]
    fn experiment_determinism_and_crn() {
        let cfg = small_config(
            vec![
                NamedPolicy::new("a", PolicySpec::Ts20),
                NamedPolicy::new("b", PolicySpec::Ts20),
                NamedPolicy::new("ucb", PolicySpec::Ucb1),
            ],
            150,
        );
        let first = run_experiment(&cfg, 1).unwrap();
        let again = run_experiment(&cfg, 4).unwrap();
        assert_eq!(first, again);
        assert_eq!(first[0].1, first[1].1);
        assert_ne!(first[0].1, first[2].1);

        let single = run_experiment(&small_config(vec![NamedPolicy::new("a", PolicySpec::Ucb1)], 1), 2)
            .unwrap();
        assert!(single[0].1.stderr.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn config_validation() {
        let dup = small_config(
            vec![NamedPolicy::new("a", PolicySpec::Ucb1), NamedPolicy::new("a", PolicySpec::Ts20)],
            2,
        );
        assert!(run_experiment(&dup, 1).is_err());
        let mut bad = small_config(vec![NamedPolicy::new("a", PolicySpec::Ucb1)], 2);
        bad.horizon = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trajectories_are_monotone_and_bounded() {
        let env = make_env_spec(EnvKindName::Beta, 5).unwrap();
        for (run, spec) in [PolicySpec::Ts20, PolicySpec::ts14(), PolicySpec::BernoulliTs, PolicySpec::Ucb1Tuned]
            .into_iter()
            .enumerate()
        {
            let rng = run_stream(3, run as u64);
            let inst = env.sample_instance(&mut rng.derive(0)).unwrap();
            let max_gap = inst.optimum().1 - inst.mu.iter().cloned().fold(f64::INFINITY, f64::min);
            let t = run_episode(&spec, &env, 300, &rng).unwrap();
            assert!(t.cumulative[0] >= 0.0);
            for (i, w) in t.cumulative.windows(2).enumerate() {
                assert!(w[1] >= w[0]);
                assert!(w[1] <= (i + 2) as f64 * max_gap + 1e-12);
            }
        }
    }
}
