//! Direct and Woodbury posteriors of the shared regression parameter against
//! each other and against an ordinary Bayesian linear regression oracle.

use bandit_lab::hier_reg::{
    posterior_direct, posterior_direct_path, posterior_woodbury, HierPosterior, HierPrior, TaskData,
    WoodburyAccumulator,
};
use bandit_lab::RngStream;
use nalgebra::{DMatrix, DVector};

fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.standard_normal())
}

fn random_spd(k: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let a = random_matrix(k, k, rng);
    let mut m = &a * a.transpose() / k as f64 + DMatrix::identity(k, k) * 0.5;
    m = (&m + m.transpose()) * 0.5;
    m
}

struct Instance {
    prior: HierPrior,
    sigma: DMatrix<f64>,
    sigma2: f64,
    tasks: Vec<TaskData>,
}

fn random_instance(rng: &mut RngStream, max_k: usize, max_n: usize, max_t: usize) -> Instance {
    let pick = |rng: &mut RngStream, hi: usize| 1 + (rng.open01() * hi as f64) as usize % hi;
    let k = pick(rng, max_k);
    let t = pick(rng, max_t);
    let prior = HierPrior::new(
        DVector::from_fn(k, |_, _| rng.standard_normal()),
        random_spd(k, rng),
    )
    .unwrap();
    let sigma = random_spd(k, rng);
    let sigma2 = 0.1 + rng.open01();
    let tasks = (0..t)
        .map(|_| {
            let n = pick(rng, max_n);
            TaskData::new(random_matrix(n, k, rng), DVector::from_fn(n, |_, _| rng.standard_normal())).unwrap()
        })
        .collect();
    Instance {
        prior,
        sigma,
        sigma2,
        tasks,
    }
}

fn rel_diff_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

fn rel_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

fn assert_close(a: &HierPosterior, b: &HierPosterior, tol: f64) {
    assert!(rel_diff_mat(&a.lambda, &b.lambda) < tol, "lambda {} vs {}", a.lambda, b.lambda);
    assert!(rel_diff_vec(&a.mu, &b.mu) < tol, "mu {} vs {}", a.mu, b.mu);
}

#[test]
fn routes_agree_on_random_instances() {
    let mut rng = RngStream::new(2718);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 8, 64, 10);
        let d = posterior_direct(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        let w = posterior_woodbury(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        assert_close(&w, &d, 1e-8);
    }
}

#[test]
fn fixed_size_instance_agrees() {
    let mut rng = RngStream::new(3);
    let k = 3;
    let prior = HierPrior::new(DVector::from_element(k, 0.2), random_spd(k, &mut rng)).unwrap();
    let sigma = random_spd(k, &mut rng);
    let tasks: Vec<_> = (0..5)
        .map(|_| TaskData::new(random_matrix(20, k, &mut rng), DVector::from_fn(20, |_, _| rng.standard_normal())).unwrap())
        .collect();
    let d = posterior_direct(&prior, &sigma, 0.5, &tasks).unwrap();
    let w = posterior_woodbury(&prior, &sigma, 0.5, &tasks).unwrap();
    assert_close(&w, &d, 1e-8);
}

#[test]
fn streaming_woodbury_tracks_direct_path() {
    let mut rng = RngStream::new(17);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 6, 30, 8);
        let path = posterior_direct_path(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        let mut acc = WoodburyAccumulator::new(&inst.prior, &inst.sigma, inst.sigma2).unwrap();
        assert_close(&acc.posterior().unwrap(), &path[0], 1e-12);
        for (task, expected) in inst.tasks.iter().zip(&path[1..]) {
            acc.push(task).unwrap();
            assert_close(&acc.posterior().unwrap(), expected, 1e-8);
        }
    }
}

#[test]
fn tiny_task_covariance_matches_bayesian_linear_regression() {
    let mut rng = RngStream::new(5);
    let k = 4;
    let sigma2 = 0.3;
    let prior = HierPrior::new(DVector::from_fn(k, |i, _| i as f64 * 0.1), random_spd(k, &mut rng)).unwrap();
    let tasks: Vec<_> = (0..4)
        .map(|_| TaskData::new(random_matrix(15, k, &mut rng), DVector::from_fn(15, |_, _| rng.standard_normal())).unwrap())
        .collect();

    // Pooled ridge-style posterior: Lambda = Lambda0 + X^T X / s2, mu = Lambda^-1 (Lambda0 mu0 + X^T y / s2).
    let mut lambda = prior.lambda0.clone();
    let mut rhs = &prior.lambda0 * &prior.mu0;
    for t in &tasks {
        lambda += t.x.transpose() * &t.x / sigma2;
        rhs += t.x.transpose() * &t.y / sigma2;
    }
    let mu = lambda.clone().lu().solve(&rhs).unwrap();
    let oracle = HierPosterior { mu, lambda };

    let sigma = DMatrix::identity(k, k) * 1e-12;
    assert_close(&posterior_direct(&prior, &sigma, sigma2, &tasks).unwrap(), &oracle, 1e-6);
    assert_close(&posterior_woodbury(&prior, &sigma, sigma2, &tasks).unwrap(), &oracle, 1e-6);
}

#[test]
fn task_order_does_not_matter() {
    let mut rng = RngStream::new(8);
    for _ in 0..20 {
        let mut inst = random_instance(&mut rng, 5, 20, 6);
        let a = posterior_direct(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        inst.tasks.reverse();
        let b = posterior_direct(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        assert_close(&b, &a, 1e-8);
        inst.tasks.rotate_left(1);
        let c = posterior_woodbury(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        assert_close(&c, &a, 1e-8);
    }
}

#[test]
fn information_never_decreases() {
    let mut rng = RngStream::new(9);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 6, 20, 10);
        let path = posterior_direct_path(&inst.prior, &inst.sigma, inst.sigma2, &inst.tasks).unwrap();
        let mut prev_trace = f64::INFINITY;
        for post in &path {
            let gain = &post.lambda - &inst.prior.lambda0;
            assert!(gain.symmetric_eigen().eigenvalues.min() >= -1e-8);
            let trace = post.covariance_trace().unwrap();
            assert!(trace <= prev_trace * (1.0 + 1e-12));
            prev_trace = trace;
        }
    }
}
