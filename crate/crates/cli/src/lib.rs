//! Command-line front end of the entflow solver: run configuration,
//! subcommands writing CSV/JSON artifacts, and the acceptance suite.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod commands;
pub mod config;

pub use commands::{CommandError, ExitStatus, Outcome};
pub use config::{InitialData, Overrides, RunConfig};
