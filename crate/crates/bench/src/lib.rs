//! Criterion benchmarks for the analysis and simulation kernels.
