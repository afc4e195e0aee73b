//! Command-line harness for the `stable-exit` library: quadrature
//! verification sweeps, closed-form tables and Monte Carlo experiments, all
//! reported as JSON or CSV.

// `!(a < b)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use report::{ExperimentReport, Format, MonteCarloDetail, ReportRow};
