//! Criterion benchmarks for refcheck. Run with `cargo bench -p refcheck-bench`.
