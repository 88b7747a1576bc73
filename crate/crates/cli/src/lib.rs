//! Command-line pipelines, configuration, file formats and run manifests
//! for `optohopf-core`.
//!
//! Commands: `theory` (analytic densities over a control grid), `simulate`
//! (Langevin ensemble and detector signal), `tomo` (reconstruction from
//! quadrature samples or detector records), `fit` (sweep fitting) and
//! `replay` (re-run a manifest and compare output digests).

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod manifest;

pub use commands::{replay, run, Command, ReplayReport};
pub use config::Config;
pub use error::{CliError, Result};
pub use manifest::RunManifest;
