//! Criterion benchmarks for parsing, evaluation and planning; see
//! `benches/core.rs`. Run with `cargo bench -p smm-bench`.
