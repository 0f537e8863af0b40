//! Command-line surface for `lindstedt-core`: TOML run configuration,
//! coefficient files, and CSV analysis tables.

pub mod coefficients;
pub mod commands;
pub mod config;
pub mod error;

pub use coefficients::CoefficientFile;
pub use commands::{run, Cli, Command};
pub use config::{OmegaSpec, Overrides, RunConfig};
pub use error::CliError;
