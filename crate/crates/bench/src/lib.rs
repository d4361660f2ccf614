//! Criterion benchmarks for `kappa-ceiling` live under `benches/`.
