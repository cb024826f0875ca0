//! Configuration files, report formats, a multi-threaded simulation driver
//! and the `preauction` command line front end for `preauction-core`.

pub mod commands;
pub mod config;
pub mod emit;
pub mod parallel;
pub mod report;

pub use commands::{run_command, Outcome, RunError};
pub use config::{parse_config, ConfigError, RunConfig};
pub use emit::{emit_report, Artifacts, Series};
pub use report::{Check, Command, Report};
