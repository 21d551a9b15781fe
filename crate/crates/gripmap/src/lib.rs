//! File formats, configuration and pipeline orchestration.

pub mod config;
pub mod formats;
pub mod io;
pub mod pipeline;
