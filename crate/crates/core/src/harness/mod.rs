//! Sequence generators and run configuration.

pub mod config;
pub mod generate;

pub use config::{RunConfig, RunMode};
pub use generate::{generate_sequence, GeneratorSpec, Model};
