//! Experiment pipeline around the `spvote` library: CSV ingestion, world
//! simulation, calibration, metric collection, and report rendering. The
//! `spvote` binary in this crate exposes each stage as a subcommand.

pub mod config;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod io;
pub mod metrics;
pub mod report;
