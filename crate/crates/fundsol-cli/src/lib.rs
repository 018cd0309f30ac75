//! Command-line surface of `fundsol`: run configuration, verification suites, and output writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

pub use config::RunConfig;
pub use error::CliError;
