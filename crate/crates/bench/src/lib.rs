//! Benchmarks for the envelope engine live in benches/.
