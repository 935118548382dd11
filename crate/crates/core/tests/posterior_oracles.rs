//! Conjugate posteriors from streaming statistics against one-observation-at-a-time
//! conjugate updates, and VarTS arm selection against a direct posterior tournament.

use bandit_lab::policies::{gaussian_ts_posterior, varts_posterior};
use bandit_lab::{Arm, ArmStats, GaussianParams, NormalGammaParams, Policy, PolicySpec, RngStream};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, Gamma, Normal};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Sequential Normal-Gamma update, one reward at a time.
fn ng_sequential(prior: NormalGammaParams, xs: &[f64]) -> (f64, f64, f64, f64) {
    let (mut mu, mut kappa, mut alpha, mut beta) = (prior.mu0, prior.kappa0, prior.alpha0, prior.beta0);
    for &x in xs {
        let k1 = kappa + 1.0;
        beta += kappa * (x - mu) * (x - mu) / (2.0 * k1);
        mu = (kappa * mu + x) / k1;
        kappa = k1;
        alpha += 0.5;
    }
    (mu, kappa, alpha, beta)
}

/// Sequential known-variance Gaussian update.
fn gaussian_sequential(prior: GaussianParams, sigma2: f64, xs: &[f64]) -> (f64, f64) {
    let (mut mean, mut var) = (prior.mean, prior.variance);
    for &x in xs {
        let precision = 1.0 / var + 1.0 / sigma2;
        mean = (mean / var + x / sigma2) / precision;
        var = 1.0 / precision;
    }
    (mean, var)
}

fn streamed(xs: &[f64]) -> ArmStats {
    let mut s = ArmStats::default();
    for &x in xs {
        s.push(x);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn varts_posterior_matches_sequential_updates(
        xs in prop::collection::vec(-5.0f64..5.0, 1..50),
        mu0 in -2.0f64..2.0,
        kappa0 in 0.0f64..10.0,
        alpha0 in 0.5f64..10.0,
        beta0 in 0.01f64..5.0,
    ) {
        let prior = NormalGammaParams::new(mu0, kappa0, alpha0, beta0).unwrap();
        let post = varts_posterior(prior, &streamed(&xs)).unwrap();
        let (mu, kappa, alpha, beta) = ng_sequential(prior, &xs);
        prop_assert!(rel_close(post.mu_hat, mu, 1e-10) || (post.mu_hat - mu).abs() < 1e-12);
        prop_assert!(rel_close(post.kappa, kappa, 1e-10));
        prop_assert!(rel_close(post.alpha, alpha, 1e-10));
        prop_assert!(rel_close(post.beta, beta, 1e-10));
    }

    #[test]
    fn gaussian_posterior_matches_sequential_updates(
        xs in prop::collection::vec(-5.0f64..5.0, 1..50),
        mean0 in -2.0f64..2.0,
        var0 in 0.01f64..10.0,
        sigma2 in 0.05f64..4.0,
    ) {
        let prior = GaussianParams::new(mean0, var0).unwrap();
        let (mean, var) = gaussian_ts_posterior(prior, sigma2, &streamed(&xs)).unwrap();
        let (m, v) = gaussian_sequential(prior, sigma2, &xs);
        prop_assert!(rel_close(mean, m, 1e-10) || (mean - m).abs() < 1e-12);
        prop_assert!(rel_close(var, v, 1e-10));
    }

    #[test]
    fn streaming_stats_match_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let a = streamed(&xs);
        let b = ArmStats::from_slice(&xs);
        prop_assert_eq!(a.count, b.count);
        prop_assert!((a.mean - b.mean).abs() <= 1e-10 * b.mean.abs().max(1.0));
        prop_assert!((a.m2 - b.m2).abs() <= 1e-10 * b.m2.abs().max(1.0));
    }

    #[test]
    fn posterior_contracts_with_data(xs in prop::collection::vec(-3.0f64..3.0, 2..40)) {
        let prior = NormalGammaParams::new(0.0, 1.0, 2.0, 1.0).unwrap();
        let g = GaussianParams::new(0.0, 2.0).unwrap();
        let mut prev = varts_posterior(prior, &ArmStats::default()).unwrap();
        let mut prev_var = g.variance;
        let mut s = ArmStats::default();
        for &x in &xs {
            s.push(x);
            let post = varts_posterior(prior, &s).unwrap();
            prop_assert!(post.kappa > prev.kappa && post.alpha > prev.alpha);
            let (_, var) = gaussian_ts_posterior(g, 1.0, &s).unwrap();
            prop_assert!(var <= prev_var);
            prev = post;
            prev_var = var;
        }
    }
}

#[test]
fn ts20_decisions_bit_identical_to_configured_varts() {
    let arms = 5;
    let mut reward_rng = RngStream::new(77);
    let mut a = Policy::new(PolicySpec::Ts20, arms).unwrap();
    let mut b = Policy::new(PolicySpec::varts_as_ts20(arms), arms).unwrap();
    let (mut ra, mut rb) = (RngStream::new(5), RngStream::new(5));
    for _ in 0..2000 {
        let arm_a = a.select_arm(&mut ra).unwrap();
        let arm_b = b.select_arm(&mut rb).unwrap();
        assert_eq!(arm_a, arm_b);
        let reward = arm_a.number() as f64 * 0.1 + reward_rng.standard_normal();
        a.observe(arm_a, reward, &mut ra).unwrap();
        b.observe(arm_b, reward, &mut rb).unwrap();
    }
    for (x, y) in a.stats().iter().zip(b.stats()) {
        assert_eq!(x.mean.to_bits(), y.mean.to_bits());
        assert_eq!(x.m2.to_bits(), y.m2.to_bits());
    }
}

#[test]
fn varts_selection_frequencies_match_posterior_tournament() {
    let prior = vec![NormalGammaParams::new(0.0, 1.0, 2.0, 1.0).unwrap(); 3];
    let data: [&[f64]; 3] = [&[0.1, 0.4, -0.2], &[0.3, 0.2], &[0.0, 0.9, 0.6, -0.1]];
    let mut policy = Policy::new(PolicySpec::VarTs { prior: prior.clone() }, 3).unwrap();
    let mut rng = RngStream::new(11);
    for (i, xs) in data.iter().enumerate() {
        for &x in *xs {
            policy.observe(Arm::from_index(i), x, &mut rng).unwrap();
        }
    }

    let selects = 100_000;
    let mut picked = [0u64; 3];
    for _ in 0..selects {
        picked[policy.select_arm(&mut rng).unwrap().index()] += 1;
    }

    // Independent tournament with rand_distr samplers, driven by a separate stream.
    let posts: Vec<_> = data
        .iter()
        .zip(&prior)
        .map(|(xs, p)| ng_sequential(*p, xs))
        .collect();
    let mut oracle_rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let tournaments = 1_000_000;
    let mut wins = [0u64; 3];
    for _ in 0..tournaments {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &(mu, kappa, alpha, beta)) in posts.iter().enumerate() {
            let lambda = Gamma::new(alpha, 1.0 / beta).unwrap().sample(&mut oracle_rng);
            let draw = Normal::new(mu, 1.0 / (kappa * lambda).sqrt()).unwrap().sample(&mut oracle_rng);
            if draw > best.0 {
                best = (draw, i);
            }
        }
        wins[best.1] += 1;
    }

    for i in 0..3 {
        let p_hat = picked[i] as f64 / selects as f64;
        let q_hat = wins[i] as f64 / tournaments as f64;
        let se = (p_hat * (1.0 - p_hat) / selects as f64 + q_hat * (1.0 - q_hat) / tournaments as f64).sqrt();
        assert!((p_hat - q_hat).abs() < 5.0 * se, "arm {}: {p_hat} vs {q_hat} (se {se})", i + 1);
    }
}
