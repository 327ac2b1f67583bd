//! Benchmarks for the simulators and samplers.
