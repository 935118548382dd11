use super::ArmStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcbKind {
    Ucb1,
    Ucb1Tuned,
    UcbV,
}

/// Exploration constants of UCB-V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcbVConstants {
    /// Reward range bound.
    pub b: f64,
    pub zeta: f64,
}

impl Default for UcbVConstants {
    fn default() -> Self {
        Self { b: 1.0, zeta: 1.2 }
    }
}

/// Index of an arm in round `t`; `+inf` for an arm never pulled.
pub fn ucb_index(kind: UcbKind, stats: &ArmStats, t: u64, consts: UcbVConstants) -> f64 {
    ucb_index_ln(kind, stats, (t.max(1) as f64).ln(), consts)
}

/// [`ucb_index`] with `ln t` supplied directly.
///
/// * UCB1: `mean + sqrt(2 ln t / N)`
/// * UCB1-Tuned: `mean + sqrt(ln t / N * min(1/4, V + sqrt(2 ln t / N)))`
/// * UCB-V: `mean + sqrt(2 V zeta ln t / N) + 3 b zeta ln t / N`
///
/// with `V = m2 / N`.
pub fn ucb_index_ln(kind: UcbKind, stats: &ArmStats, ln_t: f64, consts: UcbVConstants) -> f64 {
    if stats.count == 0 {
        return f64::INFINITY;
    }
    let n = stats.count as f64;
    let v = stats.variance();
    match kind {
        UcbKind::Ucb1 => stats.mean + (2.0 * ln_t / n).sqrt(),
        UcbKind::Ucb1Tuned => {
            let cap = (v + (2.0 * ln_t / n).sqrt()).min(0.25);
            stats.mean + (ln_t / n * cap).sqrt()
        }
        UcbKind::UcbV => {
            let UcbVConstants { b, zeta } = consts;
            stats.mean + (2.0 * v * zeta * ln_t / n).sqrt() + 3.0 * b * zeta * ln_t / n
        }
    }
}
