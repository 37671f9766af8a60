//! Criterion benchmarks for `contactflow-core`; see `benches/core.rs`.
