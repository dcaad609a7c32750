//! Configuration, report formats and the `westervelt` command line built on
//! [`westervelt_core`].
//!
//! Exit codes: 0 success, 2 configuration or validation error, 3 numerical
//! failure, 4 parabolicity violation (`simulate` and `decay`).

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::CliError;
