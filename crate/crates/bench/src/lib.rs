//! Criterion benchmarks for the solver and fitting hot paths. See `benches/`.
