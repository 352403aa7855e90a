//! Criterion benchmarks for the hskpz kernels live under `benches/`.
