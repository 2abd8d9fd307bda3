//! Benchmark crate: no library code of its own. See `benches/kernels.rs`.
