//! Batch front end for `freedisk`: scenario configs, subcommands and the verification suites.

pub mod commands;
pub mod scenario;
pub mod suite;

pub use commands::{run, Cli, Command};
pub use scenario::Scenario;
