//! Criterion benchmarks for the string billiard; run with `cargo bench -p string-billiard-bench`.
