//! Command-line harness around `raq-prep-core`: TOML configuration, graph
//! inputs, seeded trial-parallel sweeps, the bound-verification suite and
//! CSV / JSON-lines output.

pub mod cli;
pub mod config;
pub mod error;
pub mod graph_spec;
pub mod output;
pub mod sweep;
pub mod verify;

pub use cli::cli_run;
pub use error::{CliError, CliResult};
