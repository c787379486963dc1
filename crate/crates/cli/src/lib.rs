//! Benchmark runner for the p-multigrid solvers: configuration parsing, sweep
//! execution and table output.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{parse_config, Mode, RunConfig};
pub use error::{CliError, Result};
pub use report::{to_csv, to_markdown, write_outputs};
pub use runner::{run, ResultRow, ResultTable, RunOptions, Status};
