//! Criterion benchmarks for the closed forms and the oracle live in `benches/`.
