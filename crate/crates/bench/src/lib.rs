//! Criterion benchmarks for the graphw kernels; see `benches/`.
