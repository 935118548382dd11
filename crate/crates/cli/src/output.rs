//! Regret curves as CSV.
//!
//! Floats use Rust's `Display`, the shortest decimal that parses back to the
//! same double, so files are byte-identical for identical curves.

use std::fmt::Write as _;

use bandit_lab::AggregateCurve;

pub const CSV_HEADER: &str = "round,mean_regret,stderr,runs,policy,env,K,horizon,seed";

/// Per-file columns that repeat on every row.
#[derive(Debug, Clone)]
pub struct CurveMeta<'a> {
    pub policy: &'a str,
    pub env: &'a str,
    pub arms: usize,
    pub horizon: usize,
    pub seed: u64,
}

pub fn curve_csv(curve: &AggregateCurve, meta: &CurveMeta<'_>) -> String {
    let mut out = String::with_capacity(64 * (curve.rounds.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for ((round, mean), se) in curve.rounds.iter().zip(&curve.mean_regret).zip(&curve.stderr) {
        writeln!(
            out,
            "{round},{mean},{se},{},{},{},{},{},{}",
            curve.runs, meta.policy, meta.env, meta.arms, meta.horizon, meta.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_follow_header() {
        let curve = AggregateCurve {
            rounds: vec![1, 2],
            mean_regret: vec![0.0, 0.1],
            stderr: vec![0.0, 1e-7],
            runs: 3,
        };
        let meta = CurveMeta {
            policy: "varts",
            env: "bernoulli",
            arms: 4,
            horizon: 2,
            seed: 9,
        };
        assert_eq!(
            curve_csv(&curve, &meta),
            "round,mean_regret,stderr,runs,policy,env,K,horizon,seed\n\
             1,0,0,3,varts,bernoulli,4,2,9\n\
             2,0.1,0.0000001,3,varts,bernoulli,4,2,9\n"
        );
    }
}
