//! Criterion benchmarks for the umbilic pipeline; see `benches/pipeline.rs`.
