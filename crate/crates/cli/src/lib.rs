//! Command-line workbench around `regvar-core`: configuration, CSV ingestion,
//! reproducible reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod output;

pub use error::{CliError, ExitStatus};
