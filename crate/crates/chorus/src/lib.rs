//! Chorus recognition toolkit: audio and file IO, corpus directories, the
//! experiment pipeline and the `chorus` command line, on top of
//! `chorus-core`.

pub mod cli;
pub mod config;
pub mod dataset;
mod error;
pub mod formats;
pub mod pipeline;
pub mod wav;

pub use error::{Error, Result};
