//! Library side of the `nehari` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Cli};
pub use error::CliError;
pub use report::Report;
