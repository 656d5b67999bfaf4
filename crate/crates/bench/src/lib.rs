//! Criterion benchmarks for the model live under `benches/`.
