//! Batch front end for speed limit runs: JSON configs in, JSON reports and
//! CSV tables out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod protocols;
pub mod report;

pub use error::CliError;
