//! Batch front end for the artauth pipeline: corpus synthesis, feature
//! extraction, grid-searched training, scoring and feature importance.
//!
//! The binary is a thin argument parser over [`commands`]; everything it
//! writes goes through [`output`] so files appear atomically.

pub mod commands;
pub mod config;
pub mod error;
pub mod features_io;
pub mod manifest;
pub mod modelfile;
pub mod output;

pub use config::Config;
pub use error::CliError;
pub use modelfile::ModelFile;
