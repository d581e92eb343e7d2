//! IO, configuration and the command-line driver for `calabi-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::RunConfig;
pub use error::{ForgeError, Result};
