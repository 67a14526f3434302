//! Criterion benchmarks for the hoflow kernels live in `benches/`.
