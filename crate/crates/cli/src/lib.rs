//! Command-line front end for `lrorder-core`: data and mass-function files,
//! flat key=value configuration, and the `decompose`, `compose`, `fit`,
//! `test` and `summarize` commands.

pub mod args;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod massfile;
pub mod output;

pub use args::{Cli, Command};
pub use commands::{compose, decompose, fit, run, summarize_command, summarize_draws, test, test_file, RunReport};
pub use config::RunConfig;
pub use dataset::{load_dataset, DataFormat, Dataset};
pub use error::{CliError, CliResult};
pub use output::{write_outputs, DrawsFile};
