//! Criterion benchmarks for `bandit-lab`; see `benches/`.
