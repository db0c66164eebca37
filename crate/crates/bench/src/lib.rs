//! Criterion benchmarks for `ionsense`; see `benches/`.
