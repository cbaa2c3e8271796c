//! Batch front-end for `photonflow-core`: JSON job files in, CSV traces and
//! raw complex tensors out.

pub mod commands;
pub mod config;
pub mod error;
pub mod pulse;
pub mod sidecar;
pub mod system;
pub mod verify;

pub use config::{Job, JobConfig};
pub use error::{CliError, CliResult};
