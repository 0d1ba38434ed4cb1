//! Criterion benchmarks for gnpx-core live under `benches/`.
