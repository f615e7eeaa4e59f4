//! Scans, figure recipes and reproducible file output on top of
//! `combcavity-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod recipe;

pub use config::Config;
pub use error::{CliError, CliResult};
