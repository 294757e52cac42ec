//! Batch front end: reads a run configuration, executes one pipeline and
//! writes a JSON report plus CSV plot data.

pub mod config;
pub mod error;
pub mod run;

pub use config::{Command, RunConfig};
pub use error::CliError;
