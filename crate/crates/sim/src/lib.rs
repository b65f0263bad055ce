//! Batch front end for `ris-core`: TOML scenario documents, single runs,
//! parameter sweeps, pattern cuts, deployment and table reproduction, all
//! written as CSV.
//!
//! The `ris` binary is a thin wrapper over these functions.

pub mod commands;
pub mod error;
pub mod evaluate;
pub mod output;
pub mod pattern;
pub mod schema;
pub mod sweep;
pub mod tables;

pub use error::{exit, SimError};
pub use evaluate::{evaluate, Evaluation, HopReport};
pub use output::{CsvOptions, Table};
