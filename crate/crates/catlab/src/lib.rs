//! Command-line driver for `catlab-core`: run configuration, the `prepare`,
//! `verify`, `timings` and `sweep` commands, and their JSON/CSV outputs.
//!
//! Exit codes: 0 success, 1 a hard invariant failed, 2 usage or validation
//! error, 3 the Fock truncation is too small.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod prepare;
pub mod sweep;
pub mod timings;
pub mod verify;

pub use config::{RunConfig, TimeSpec};
pub use error::CliError;
