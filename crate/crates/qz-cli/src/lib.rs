//! Pipeline plumbing behind the `qz` binary, exposed as a library so the
//! integration suite can drive jobs and parse outputs directly.

pub mod commands;
pub mod error;
pub mod job;
pub mod zerofile;

pub use error::CliError;
pub use job::{run_zeros, JobConfig, JobSummary};
