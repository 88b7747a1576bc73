//! Analytic steady-state densities over the control grid.

use super::{peak_radius, write_density_raster, write_radial, RunRecord, LENGTH_UNIT};
use crate::config::Config;
use crate::error::{InSection, Result};
use crate::format::{Column, Table};
use crate::manifest::Outputs;
use optohopf_core::quadrature::linspace;
use optohopf_core::SteadyState;

pub const SUMMARY_FILE: &str = "summary.csv";

pub(crate) fn run(config: &Config, out: &mut Outputs) -> Result<RunRecord> {
    let controls = config.axis.control_values()?;
    let states = controls
        .iter()
        .map(|&c| {
            let rc = config.coefficients(c)?;
            SteadyState::from_reduced(&rc).in_section("model")
        })
        .collect::<Result<Vec<_>>>()?;
    if config.theory.radial_points < 2 {
        return Err(crate::error::CliError::config(
            "invalid key `theory.radial_points`: must be >= 2",
        ));
    }
    // one grid for the whole family so panels share an axis
    let r_max = match config.theory.r_max {
        Some(r) => r,
        None => states
            .iter()
            .map(|s| s.default_radius_max())
            .fold(0.0, f64::max),
    };
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(crate::error::CliError::config(
            "invalid key `theory.r_max`: must be finite and > 0",
        ));
    }
    let radii = linspace(0.0, r_max, config.theory.radial_points);

    let mut summary = Table::new(vec![
        Column::new("control", "1"),
        Column::new("g0", "1"),
        Column::new("nu", "1"),
        Column::new("peak_radius", LENGTH_UNIT),
        Column::new("limit_cycle_radius", LENGTH_UNIT),
        Column::new("mean_radius", LENGTH_UNIT),
        Column::new("grid_mass", "1"),
    ]);
    for (i, (state, &control)) in states.iter().zip(&controls).enumerate() {
        let dist = state.distribution(&radii).in_section("theory")?;
        write_radial(&out.file(&format!("density_{i:03}.csv")), &dist)?;
        if config.theory.raster_points >= 2 {
            write_density_raster(
                &out.file(&format!("raster_{i:03}.csv")),
                &dist,
                config.theory.raster_points,
            )?;
        }
        summary.push(vec![
            control,
            state.linear(),
            state.nu(),
            peak_radius(&dist.radii, &dist.density),
            state.limit_cycle_radius().unwrap_or(0.0),
            state.radial_moment(1),
            dist.mass(),
        ]);
    }
    summary.write(&out.file(SUMMARY_FILE))?;
    Ok(RunRecord {
        inputs: Vec::new(),
        seeds: Vec::new(),
    })
}
