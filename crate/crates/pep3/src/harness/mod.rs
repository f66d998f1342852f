//! Operational glue: on-disk cluster state, in-memory clusters for
//! experiments, fault-injection runs, and the benchmark battery.

pub mod adversary;
pub mod bench;
pub mod cluster;
pub mod config;
