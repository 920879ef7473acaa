//! Command-line front end for `twosystem-core`: TOML run configs, trajectory
//! CSV, invariant-report JSON and the subcommands behind the `twosystem`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::RunConfig;
pub use error::CliError;
