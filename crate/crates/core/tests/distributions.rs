//! Moment identities of the samplers, each checked within 5 Monte-Carlo
//! standard errors at 10^5 or more draws.

use bandit_lab::sampling::inverse_gamma_mean;
use bandit_lab::{ArmStats, BetaParams, GammaParams, NormalGammaParams, RngStream};

const DRAWS: usize = 200_000;

/// Mean and standard error of the mean.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let s = ArmStats::from_slice(xs);
    (s.mean, (s.m2 / (xs.len() as f64 - 1.0) / xs.len() as f64).sqrt())
}

fn within(xs: &[f64], expected: f64, what: &str) {
    let (m, se) = mean_se(xs);
    assert!((m - expected).abs() < 5.0 * se, "{what}: {m} vs {expected} (se {se})");
}

#[test]
fn gamma_mean_and_variance() {
    for (shape, rate) in [(0.3, 2.0), (1.0, 1.0), (4.0, 0.5), (25.0, 3.0)] {
        let g = GammaParams::new(shape, rate).unwrap();
        let mut rng = RngStream::new(1).derive(shape.to_bits());
        let xs: Vec<f64> = (0..DRAWS).map(|_| g.sample(&mut rng).unwrap()).collect();
        let mean = shape / rate;
        within(&xs, mean, "gamma mean");
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        within(&sq, shape / (rate * rate), "gamma variance");
    }
}

#[test]
fn inverse_gamma_mean_of_precision_draws() {
    for (alpha, beta) in [(3.0, 1.0), (4.0, 2.5), (10.0, 0.3)] {
        let g = GammaParams::new(alpha, beta).unwrap();
        let mut rng = RngStream::new(2).derive(alpha.to_bits());
        let inv: Vec<f64> = (0..DRAWS).map(|_| 1.0 / g.sample(&mut rng).unwrap()).collect();
        within(&inv, inverse_gamma_mean(alpha, beta).unwrap(), "E[1/lambda]");
    }
}

#[test]
fn sample_variance_sum_is_chi_square() {
    // m2 / sigma^2 of n Gaussian draws has mean n - 1.
    for (n, sigma2) in [(2usize, 1.0f64), (5, 0.25), (20, 4.0)] {
        let mut rng = RngStream::new(3).derive(n as u64);
        let ratios: Vec<f64> = (0..DRAWS / 2)
            .map(|_| {
                let xs: Vec<f64> = (0..n).map(|_| 1.5 + sigma2.sqrt() * rng.standard_normal()).collect();
                ArmStats::from_slice(&xs).m2 / sigma2
            })
            .collect();
        within(&ratios, n as f64 - 1.0, "chi-square mean");
    }
}

#[test]
fn normal_gamma_marginal_mean_variance() {
    let p = NormalGammaParams::new(0.7, 2.0, 4.0, 3.0).unwrap();
    let mut rng = RngStream::new(4);
    let mus: Vec<f64> = (0..DRAWS).map(|_| p.sample(&mut rng).unwrap().0).collect();
    within(&mus, 0.7, "NG marginal mean");
    let sq: Vec<f64> = mus.iter().map(|m| (m - 0.7) * (m - 0.7)).collect();
    within(&sq, p.marginal_mean_variance().unwrap(), "NG marginal variance");
    assert_eq!(p.marginal_mean_variance().unwrap(), 3.0 / (2.0 * 3.0));
}

#[test]
fn beta_mean() {
    let b = BetaParams::new(2.0, 9.0).unwrap();
    let mut rng = RngStream::new(5);
    let xs: Vec<f64> = (0..DRAWS).map(|_| b.sample(&mut rng).unwrap()).collect();
    within(&xs, b.mean(), "beta mean");
}
