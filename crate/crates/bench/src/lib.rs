//! Criterion benchmarks for toi-core; see `benches/`.
