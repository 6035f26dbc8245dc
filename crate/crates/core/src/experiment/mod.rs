//! Configuration, drivers and CSV output for the `qtomo` command line.

pub mod config;
pub mod output;
pub mod runs;
pub mod standard;

pub use config::{ChannelSpec, ExperimentConfig, RunMode, StateSpec, Verb};
pub use output::Table;
pub use runs::{run, run_and_write, RunRecord, Setup};
pub use standard::StandardTomography;
