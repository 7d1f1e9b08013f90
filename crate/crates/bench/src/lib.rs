//! Criterion benchmarks for the exponent routines live in `benches/`.
