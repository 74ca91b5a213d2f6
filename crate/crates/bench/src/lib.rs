//! Benchmark harness: instance generation and files, experiment runs,
//! ablations, parameter calibration and reports.

pub mod ablation;
pub mod cli;
pub mod experiment;
pub mod generator;
pub mod instance_io;
pub mod report;
pub mod seeds;
pub mod stats;
pub mod taguchi;
