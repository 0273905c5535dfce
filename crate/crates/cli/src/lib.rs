//! Batch pipeline around `twoscale-core`: configuration, stages and
//! artifacts.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod verify;

pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::Pipeline;
