//! The four pipeline commands plus manifest replay.

mod fit;
mod simulate;
mod theory;
mod tomo;

pub use fit::{load_sweep, SweepPointFile, SweepSpec, SWEEP_FILE};
pub use tomo::{load_quadratures, reconstruct_loaded, reconstruct_quadratures, LoadedQuadratures};

use crate::config::{Config, RESOLVED_CONFIG_FILE_HINT};
use crate::error::{CliError, Result};
use crate::format::{write_raster, Column, Table};
use crate::manifest::{sha256_file, FileDigest, Outputs, RunManifest, RESOLVED_CONFIG_FILE};
use optohopf_core::RadialDistribution;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Reduced length unit in file headers.
pub const LENGTH_UNIT: &str = "lambda";
/// Per-area density unit in file headers.
pub const DENSITY_UNIT: &str = "lambda^-2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Theory,
    Simulate,
    Tomo,
    Fit,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theory => "theory",
            Command::Simulate => "simulate",
            Command::Tomo => "tomo",
            Command::Fit => "fit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Command::Theory,
            Command::Simulate,
            Command::Tomo,
            Command::Fit,
        ]
        .into_iter()
        .find(|c| c.name() == name)
    }
}

/// What a command read besides its config.
pub(crate) struct RunRecord {
    pub inputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
}

/// Runs `command` with a resolved config, writing into `out` with a local
/// pool of `threads` workers (0 = one per core).
pub fn run(command: Command, config: &Config, out: &Path, threads: usize) -> Result<RunManifest> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {threads} worker threads: {e}")))?;
    let used_threads = pool.current_num_threads();
    let mut outputs = Outputs::new(out)?;
    let config_path = outputs.file(RESOLVED_CONFIG_FILE);
    let text = format!("{RESOLVED_CONFIG_FILE_HINT}\n{}", config.to_toml());
    std::fs::write(&config_path, text).map_err(|e| CliError::io(&config_path, e))?;

    let record = pool.install(|| match command {
        Command::Theory => theory::run(config, &mut outputs),
        Command::Simulate => simulate::run(config, &mut outputs),
        Command::Tomo => tomo::run(config, &mut outputs),
        Command::Fit => fit::run(config, &mut outputs),
    })?;

    let inputs = record
        .inputs
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: toml::Table::try_from(config).expect("config is a table"),
        seeds: record.seeds,
        inputs,
        outputs: outputs.digests()?,
        threads: used_threads,
        duration_s: start.elapsed().as_secs_f64(),
    };
    manifest.write(out)?;
    Ok(manifest)
}

/// Per-file comparison of a replayed run against its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub original: RunManifest,
    pub replayed: RunManifest,
    /// Output files whose digests differ or that are missing in either run.
    pub mismatches: Vec<PathBuf>,
}

/// Re-runs the command recorded in a manifest and compares output digests.
/// Input files must still match their recorded digests.
pub fn replay(manifest_path: &Path, out: &Path, threads: usize) -> Result<ReplayReport> {
    let original = RunManifest::read(manifest_path)?;
    let command = Command::from_name(&original.command).ok_or_else(|| {
        CliError::io(
            manifest_path,
            format!("unknown command `{}`", original.command),
        )
    })?;
    for input in &original.inputs {
        let digest = sha256_file(&input.path)?;
        if digest != input.sha256 {
            return Err(CliError::io(
                &input.path,
                "input file changed since the recorded run",
            ));
        }
    }
    let config: Config = original
        .config
        .clone()
        .try_into()
        .map_err(|e| CliError::config(format!("manifest config: {e}")))?;
    let replayed = run(command, &config, out, threads)?;
    let mut mismatches: Vec<PathBuf> = original
        .outputs
        .iter()
        .filter(|f| replayed.output_digest(&f.path.to_string_lossy()) != Some(f.sha256.as_str()))
        .map(|f| f.path.clone())
        .collect();
    mismatches.extend(
        replayed
            .outputs
            .iter()
            .filter(|f| original.output_digest(&f.path.to_string_lossy()).is_none())
            .map(|f| f.path.clone()),
    );
    Ok(ReplayReport {
        original,
        replayed,
        mismatches,
    })
}

/// `r, P` file for a radial density.
pub(crate) fn write_radial(path: &Path, d: &RadialDistribution) -> Result<()> {
    Table::from_columns(
        vec![
            Column::new("r", LENGTH_UNIT),
            Column::new("P", DENSITY_UNIT),
        ],
        &[&d.radii, &d.density],
    )
    .write(path)
}

pub(crate) fn write_density_raster(path: &Path, d: &RadialDistribution, n: usize) -> Result<()> {
    let (axis, values) = d.raster(n);
    write_raster(path, &axis, &values, LENGTH_UNIT, ("P", DENSITY_UNIT))
}

/// Parabolic refinement of the grid maximum of `density`.
pub fn peak_radius(radii: &[f64], density: &[f64]) -> f64 {
    let (i, _) =
        density.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |a, (i, &v)| if v > a.1 { (i, v) } else { a },
        );
    if i == 0 || i + 1 >= density.len() {
        return radii[i];
    }
    let (a, b, c) = (density[i - 1], density[i], density[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return radii[i];
    }
    let shift = 0.5 * (a - c) / denom;
    let h = 0.5 * (radii[i + 1] - radii[i - 1]);
    radii[i] + shift.clamp(-0.5, 0.5) * h
}
