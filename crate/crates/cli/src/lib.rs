//! Experiment runner behind the `truncfrac` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, Experiment, RunConfig, Settings};
pub use run::{run, Report, Status};
