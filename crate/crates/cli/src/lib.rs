//! Library side of the command-line harness: dataset files, experiment
//! configuration, the Monte-Carlo engine, and report rendering.

pub mod config;
pub mod dataset;
pub mod experiment;
pub mod report;
