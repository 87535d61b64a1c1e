//! Criterion benchmarks for the hot paths of `fracheat-core`; see `benches/`.
