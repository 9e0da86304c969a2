//! Experiment driver for quantum-register simulation of cat-map Liouville
//! densities. The `lqc` binary is a thin clap front end over [`experiments::run`].

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod pipeline;

pub use config::{Command, ConfigError, RunConfig};
pub use experiments::{run, Finished};
pub use manifest::Manifest;
