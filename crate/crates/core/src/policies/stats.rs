/// Per-arm sufficient statistics: pull count, running mean and the running sum
/// of squared deviations from the current mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl ArmStats {
    /// Welford update.
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
    }

    /// Two-pass batch statistics over `xs`.
    pub fn from_slice(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self {
            count: xs.len() as u64,
            mean,
            m2,
        }
    }

    /// Biased (divide by `N`) empirical variance; zero before any pull.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }
}
