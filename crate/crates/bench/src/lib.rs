//! Criterion benchmarks for `c2adic-core`; see `benches/`.
