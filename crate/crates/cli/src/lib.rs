//! Library side of the `fhc` binary: argument types, command dispatch and
//! artifact writers.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Outcome, Report};
pub use config::Cli;
