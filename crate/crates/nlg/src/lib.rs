//! File formats, model checkpoints, run configuration and the command-line
//! front end for `ensnlg-core`.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;

pub use error::{NlgError, Result};
