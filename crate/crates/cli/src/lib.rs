// SPDX-License-Identifier: Apache-2.0

//! Configuration loading and run modes behind the `rindler-sim` binary.

pub mod config;
pub mod error;
pub mod run;
pub mod units;

pub use config::{load, LoadedConfig, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{execute, Outcome, RunMode};
