//! Criterion benchmarks for the orgsim engine live in `benches/`.
