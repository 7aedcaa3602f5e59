//! File formats, run manifests and the `mrw` command line on top of `mrw-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;

pub use error::{Error, Result};
