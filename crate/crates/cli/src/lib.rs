//! Experiment driver for the compass-chain decoherence engine.
//!
//! Runs are described by a TOML [`config::RunConfig`]. `echo` writes one
//! `|F_14(t)|` series, `sweep` a long-format grid of echoes and correlation
//! measures, `fit` extracts scaling exponents from those CSVs, and
//! `validate` checks the engine against the dense oracle. Every output
//! directory carries a `manifest.json` with SHA-256 checksums.

pub mod config;
pub mod error;
pub mod fit;
pub mod output;
pub mod run;
pub mod validate;

pub use config::RunConfig;
pub use error::{CliError, Result};
