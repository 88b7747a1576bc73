//! Command-line surface.

use crate::commands::{self, Command};
use crate::config::{self, Config};
use crate::error::{CliError, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "optohopf",
    version,
    about = "Phase-space tomography and noise-driven Hopf dynamics of optomechanical cavities"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "OPTOHOPF_CONFIG")]
    pub config: Option<PathBuf>,
    /// Random seed (overrides run.seed).
    #[arg(long, global = true, env = "OPTOHOPF_SEED")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "OPTOHOPF_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (0 = one per core). Does not change results.
    #[arg(long, global = true, env = "OPTOHOPF_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Config override `section.key=value` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Input file (tomo) or sweep directory (fit).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Action,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    /// Analytic steady-state densities over the control grid.
    Theory,
    /// Langevin ensemble, quadrature samples and detector signal.
    Simulate,
    /// Reconstruct the radial phase-space density from samples or detector data.
    Tomo,
    /// Fit reduced device parameters to a sweep of reconstructions.
    Fit,
    /// Re-run a recorded manifest and compare output digests.
    Replay {
        /// Manifest of the run to reproduce.
        manifest: PathBuf,
    },
}

impl Cli {
    /// Resolves the configuration from file, environment and flags.
    pub fn resolve_config(&self, env: Vec<(String, String)>) -> Result<Config> {
        let mut overrides = config::env_overrides(env);
        overrides.extend(self.overrides.iter().cloned());
        let mut cfg = config::resolve(self.config.as_deref(), &overrides)?;
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        match (&self.command, &self.input) {
            (Action::Tomo, Some(p)) => cfg.tomo.input = Some(p.clone()),
            (Action::Fit, Some(p)) => cfg.fit.sweep = Some(p.clone()),
            (_, Some(_)) => {
                return Err(CliError::config(
                    "--input is only used by the tomo and fit commands",
                ))
            }
            _ => {}
        }
        Ok(cfg)
    }

    /// Executes the parsed command; returns a one-line summary.
    pub fn execute(&self) -> Result<String> {
        let command = match &self.command {
            Action::Theory => Command::Theory,
            Action::Simulate => Command::Simulate,
            Action::Tomo => Command::Tomo,
            Action::Fit => Command::Fit,
            Action::Replay { manifest } => {
                let report = commands::replay(manifest, &self.out, self.threads)?;
                if report.mismatches.is_empty() {
                    return Ok(format!(
                        "replay of `{}`: all {} outputs identical",
                        report.original.command,
                        report.original.outputs.len()
                    ));
                }
                let names: Vec<String> = report
                    .mismatches
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect();
                return Err(CliError::Numerical(format!(
                    "replay differs in {}",
                    names.join(", ")
                )));
            }
        };
        let cfg = self.resolve_config(std::env::vars().collect())?;
        let manifest = commands::run(command, &cfg, &self.out, self.threads)?;
        Ok(format!(
            "{}: wrote {} files to {} ({:.2} s)",
            manifest.command,
            manifest.outputs.len(),
            self.out.display(),
            manifest.duration_s
        ))
    }
}
