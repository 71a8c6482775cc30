//! Command-line and HTTP front ends for the gcr engine.

pub mod cli;
pub mod ops;
pub mod server;
