//! Sweep fitting of reduced device parameters.
//!
//! A sweep directory holds `sweep.toml` and one data file per operating
//! point:
//!
//! ```toml
//! axis = "power"            # or "detuning"
//! [[point]]
//! file = "p000.csv"         # quadrature samples or a reconstruction
//! control = -0.025
//! ```

use super::tomo::{load_quadratures, reconstruct_loaded};
use super::RunRecord;
use crate::config::{AxisKind, Config};
use crate::error::{CliError, InSection, Result};
use crate::format::{number, write_key_values, Column, Table};
use crate::manifest::Outputs;
use optohopf_core::fitting::{
    fit, ControlAxis, FitConfig, FitParameter, FitParams, FitResult, SweepDataset, SweepPoint,
};
use optohopf_core::RadialDistribution;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SWEEP_FILE: &str = "sweep.toml";
pub const REPORT_FILE: &str = "fit_report.txt";
pub const RESULT_FILE: &str = "fit_result.txt";
pub const RESIDUALS_FILE: &str = "residuals.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPointFile {
    pub file: PathBuf,
    /// Control value; required.
    pub control: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Option<AxisKind>,
    /// Overrides `optics.beta_plus` on the detuning axis.
    pub beta_plus: Option<f64>,
    #[serde(default)]
    pub point: Vec<SweepPointFile>,
}

/// Reads the sweep metadata and turns every point file into a clipped radial
/// distribution. Returns the dataset and the files read.
pub fn load_sweep(dir: &Path, config: &Config) -> Result<(SweepDataset, Vec<PathBuf>)> {
    let spec_path = dir.join(SWEEP_FILE);
    let text = std::fs::read_to_string(&spec_path).map_err(|e| CliError::io(&spec_path, e))?;
    let spec: SweepSpec = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", spec_path.display())))?;
    let kind = spec.axis.ok_or_else(|| {
        CliError::config(format!(
            "{}: missing `axis` (\"power\" or \"detuning\")",
            spec_path.display()
        ))
    })?;
    let axis = match kind {
        AxisKind::Power => ControlAxis::PowerExcess,
        AxisKind::Detuning => ControlAxis::Detuning {
            beta_plus: spec.beta_plus.unwrap_or(config.optics.beta_plus),
        },
    };
    let mut files = vec![spec_path.clone()];
    let mut points = Vec::with_capacity(spec.point.len());
    for (i, p) in spec.point.iter().enumerate() {
        let control = p.control.ok_or_else(|| {
            CliError::config(format!(
                "{}: point {i} (`{}`) has no control value",
                spec_path.display(),
                p.file.display()
            ))
        })?;
        let path = dir.join(&p.file);
        let (reconstruction, sample_count) = load_point(&path, config)?;
        files.push(path);
        points.push(SweepPoint {
            control,
            reconstruction,
            sample_count,
        });
    }
    let dataset = SweepDataset::new(axis, points).in_section("fit")?;
    Ok((dataset, files))
}

fn load_point(path: &Path, config: &Config) -> Result<(RadialDistribution, Option<usize>)> {
    let table = Table::read(path)?;
    let names = table.names();
    let density_column = match names.as_slice() {
        ["r", "P"] => Some(1),
        ["r", "P_raw", "P_clipped"] => Some(2),
        _ => None,
    };
    if let Some(col) = density_column {
        if table.columns[0].unit != "lambda" {
            return Err(CliError::io(path, "column r must have unit lambda"));
        }
        let dist = RadialDistribution::new(table.column(0), table.column(col))
            .map_err(|e| CliError::io(path, e))?;
        return Ok((dist, None));
    }
    let loaded = load_quadratures(path, config)?;
    let n = loaded.values.len();
    let res = reconstruct_loaded(&loaded, config)?;
    Ok((res.reconstruction.clipped, Some(n)))
}

fn fit_config(config: &Config) -> Result<FitConfig> {
    let f = &config.fit;
    let initial = FitParams {
        th: match f.th {
            Some(th) => th,
            None => config.th()?,
        },
        g2: f.g2.unwrap_or(config.model.g2),
        scale: f.scale,
        offset: f.offset.unwrap_or(config.axis.threshold),
    };
    if !(f.span > 1.0 && f.span.is_finite()) {
        return Err(CliError::config(
            "invalid key `fit.span`: must be finite and > 1",
        ));
    }
    let free = f.free_parameters()?;
    let mut lower = initial;
    let mut upper = initial;
    for p in [FitParameter::Th, FitParameter::G2, FitParameter::Scale] {
        lower.set(p, initial.get(p) / f.span);
        upper.set(p, initial.get(p) * f.span);
    }
    match f.offset_bounds {
        Some([lo, hi]) => {
            lower.offset = lo;
            upper.offset = hi;
        }
        None if free.contains(&FitParameter::Offset) => {
            return Err(CliError::config(
                "invalid key `fit.offset_bounds`: required when the offset is free",
            ))
        }
        None => {}
    }
    Ok(FitConfig {
        initial,
        lower,
        upper,
        free,
        max_iterations: f.max_iterations,
        tolerance: f.tolerance,
        seeds_per_parameter: f.seeds_per_parameter,
    })
}

/// Human-readable report with the per-point residual table.
pub fn report(result: &FitResult, dataset: &SweepDataset) -> String {
    let mut s = String::new();
    let axis = match dataset.axis() {
        ControlAxis::PowerExcess => "power excess dP/P_LC".to_string(),
        ControlAxis::Detuning { beta_plus } => format!("detuning s_D (beta_plus = {beta_plus})"),
    };
    writeln!(
        s,
        "Sweep fit over {} points, control axis: {axis}",
        dataset.points().len()
    )
    .unwrap();
    writeln!(s).unwrap();
    writeln!(s, "{:<8} {:>24} {:>8}", "param", "estimate", "status").unwrap();
    for p in FitParameter::ALL {
        let status = if result.boundary_pinned.contains(&p) {
            "BOUND"
        } else if result.free.contains(&p) {
            "free"
        } else {
            "fixed"
        };
        writeln!(
            s,
            "{:<8} {:>24} {:>8}",
            p.name(),
            number(result.estimates.get(p)),
            status
        )
        .unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "objective          {}", number(result.objective)).unwrap();
    writeln!(s, "initial objective  {}", number(result.initial_objective)).unwrap();
    writeln!(s, "iterations         {}", result.iterations).unwrap();
    writeln!(s, "simplex size       {}", number(result.simplex_size)).unwrap();
    writeln!(s, "converged          {}", result.converged).unwrap();
    writeln!(s).unwrap();
    writeln!(
        s,
        "Per-point residuals (L1 = integral of |P_data - P_model| over the plane)"
    )
    .unwrap();
    writeln!(
        s,
        "{:>24} {:>24} {:>24} {:>10}",
        "control", "g0", "L1", "samples"
    )
    .unwrap();
    for (r, p) in result.residuals.iter().zip(dataset.points()) {
        writeln!(
            s,
            "{:>24} {:>24} {:>24} {:>10}",
            number(r.control),
            number(r.g0),
            number(r.l1),
            p.sample_count.map_or("-".into(), |n| n.to_string())
        )
        .unwrap();
    }
    s
}

pub(crate) fn run(config: &Config, out: &mut Outputs) -> Result<RunRecord> {
    let dir = config.fit.sweep.clone().ok_or_else(|| {
        CliError::config("invalid key `fit.sweep`: no sweep directory (use --input or fit.sweep)")
    })?;
    let (dataset, inputs) = load_sweep(&dir, config)?;
    let cfg = fit_config(config)?;
    let result = fit(&dataset, &cfg).in_section("fit")?;

    let report_path = out.file(REPORT_FILE);
    std::fs::write(&report_path, report(&result, &dataset))
        .map_err(|e| CliError::io(&report_path, e))?;
    let mut kv: Vec<(String, String)> = FitParameter::ALL
        .iter()
        .map(|p| (p.name().to_string(), number(result.estimates.get(*p))))
        .collect();
    kv.push((
        "free".into(),
        result
            .free
            .iter()
            .map(|p| p.name())
            .collect::<Vec<_>>()
            .join(","),
    ));
    kv.push(("objective".into(), number(result.objective)));
    kv.push(("initial_objective".into(), number(result.initial_objective)));
    kv.push(("iterations".into(), result.iterations.to_string()));
    kv.push(("simplex_size".into(), number(result.simplex_size)));
    kv.push(("converged".into(), result.converged.to_string()));
    kv.push((
        "boundary_pinned".into(),
        result
            .boundary_pinned
            .iter()
            .map(|p| p.name())
            .collect::<Vec<_>>()
            .join(","),
    ));
    write_key_values(&out.file(RESULT_FILE), &kv)?;
    let mut table = Table::new(vec![
        Column::new("control", "1"),
        Column::new("g0", "1"),
        Column::new("l1", "1"),
    ]);
    for r in &result.residuals {
        table.push(vec![r.control, r.g0, r.l1]);
    }
    table.write(&out.file(RESIDUALS_FILE))?;
    Ok(RunRecord {
        inputs,
        seeds: Vec::new(),
    })
}
