//! Command-line front end for `chemopattern`: stability tables, critical
//! values, single simulations and one-parameter sweeps.

pub mod commands;
pub mod config;

pub use commands::{analyze, critical, simulate, sweep, CommandError, Summary, SweepRow};
pub use config::{parse_config, serialize_config, ConfigError, RunConfig};
