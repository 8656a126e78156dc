//! File formats, experiment configuration and the `welfair` command-line
//! tool, on top of [`welfair_core`].
//!
//! * [`csvio`]: dataset and prediction CSV files.
//! * [`model_io`]: TOML model files.
//! * [`config`]: experiment configuration files.
//! * [`results`]: results tables and metrics rows.
//! * [`sweep`]: parallel `(alpha, tau)` grids.
//! * [`cli`], [`commands`]: argument parsing and subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod model_io;
pub mod results;
pub mod sweep;

pub use error::{CliError, Result};
