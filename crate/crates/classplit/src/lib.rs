//! Java front end, file formats, comparison harness and command line for
//! the `classplit-core` refactoring pipeline.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod formats;
pub mod harness;
pub mod java;
pub mod report;
pub mod synthetic;

pub use classplit_core as core;
