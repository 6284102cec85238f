//! Criterion benchmarks for quadrelax; see `benches/`.
