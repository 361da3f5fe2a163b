//! Benchmark harness for `zar-core`; see `benches/`.
