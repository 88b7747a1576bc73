//! Phase-space tomography of phase-independent states.
//!
//! Quadrature samples X_j = √2·Re(A_j e^{−iφ}) are turned into the empirical
//! characteristic function w̃(ζ), which is apodized and Hankel-inverted to the
//! radial density P(r). A binned quadrature histogram is produced alongside
//! for diagnostics and export; it is not used by the inversion.
//!
//! [`demodulate_detector_signal`] recovers the slow amplitude from
//! reflected-power time series so the same pipeline applies to detector data.

mod characteristic;
mod correlation;
mod demodulation;
mod hankel;
mod histogram;

pub use characteristic::{
    characteristic_from_density, empirical_characteristic_function, zeta_grid, Apodization,
    CharacteristicFunction, ANALYTIC_FLOOR, DEFAULT_WINDOW_FACTOR, HOMODYNE_SCALE,
    NOISE_FLOOR_FACTOR,
};
pub use correlation::{effective_sample_count, integrated_autocorrelation_time};
pub use demodulation::{
    demodulate_detector_signal, Calibration, Demodulated, DemodulationConfig, DISTORTION_LIMIT,
    MIN_SAMPLES_PER_PERIOD,
};
pub use hankel::{
    decay_run, hankel_reconstruct, HankelReconstruction, TomographyWarning,
    MIN_POINTS_PER_OSCILLATION,
};
pub use histogram::{estimate_quadrature_pdf, BinRule, QuadraturePdf, MIN_HISTOGRAM_SAMPLES};

use crate::error::{Error, Result};
use crate::quadrature::linspace;
use alloc::vec::Vec;
use num_traits::Float;

/// Window extent, in units of ζ_w, beyond which the ζ grid is cut off
/// (the window is below e^{−9} there).
const WINDOW_EXTENT: f64 = 3.0;

/// Settings for [`reconstruct_from_samples`].
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyConfig {
    /// Explicit radial grid; overrides `radial_points`/`r_max`.
    pub radii: Option<Vec<f64>>,
    pub radial_points: usize,
    /// Radial extent; default max|X|/√2.
    pub r_max: Option<f64>,
    /// ζ-grid density in points per oscillation of J₀(s·ζ·r_max).
    pub points_per_oscillation: f64,
    pub apodization: Apodization,
    pub bin_rule: BinRule,
    /// Upper bound on the automatically extended ζ grid.
    pub max_zeta_points: usize,
    /// Sample count behind the noise floor when samples are correlated
    /// (see [`effective_sample_count`]); default is the number of samples.
    pub effective_samples: Option<f64>,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            radii: None,
            radial_points: 512,
            r_max: None,
            points_per_oscillation: 8.0,
            apodization: Apodization::default(),
            bin_rule: BinRule::FreedmanDiaconis,
            max_zeta_points: 1 << 15,
            effective_samples: None,
        }
    }
}

/// Reconstruction with all intermediate diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    /// Binned quadrature density (absent below [`MIN_HISTOGRAM_SAMPLES`]).
    pub histogram: Option<QuadraturePdf>,
    pub characteristic: CharacteristicFunction,
    pub reconstruction: HankelReconstruction,
}

impl TomographyConfig {
    fn radial_grid(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if let Some(r) = &self.radii {
            return Ok(r.clone());
        }
        if self.radial_points < 2 {
            return Err(Error::invalid("radial_points", "must be >= 2"));
        }
        let r_max = match self.r_max {
            Some(r) => r,
            None => samples.iter().fold(0.0, |m: f64, x| m.max(x.abs())) / HOMODYNE_SCALE,
        };
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::invalid("r_max", "must be finite and > 0"));
        }
        Ok(linspace(0.0, r_max, self.radial_points))
    }
}

fn truncate(cf: &mut CharacteristicFunction, zeta_end: f64) {
    let keep = cf.zeta.partition_point(|&z| z <= zeta_end).max(2);
    cf.zeta.truncate(keep);
    cf.values.truncate(keep);
    cf.imag_residual.truncate(keep);
}

/// Estimates the characteristic function on a ζ grid extended until |w̃| has
/// decayed into its noise floor (and the window, if any, has vanished).
fn adaptive_characteristic(
    samples: &[f64],
    r_max: f64,
    cfg: &TomographyConfig,
) -> Result<CharacteristicFunction> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let spread = var.sqrt().max(r_max * 1e-6);
    let run = decay_run(HOMODYNE_SCALE, r_max);
    let mut zeta_max = match cfg.apodization {
        Apodization::Fixed(w) => WINDOW_EXTENT * w,
        _ => 8.0 / spread,
    };
    loop {
        let grid = zeta_grid(zeta_max, r_max, HOMODYNE_SCALE, cfg.points_per_oscillation);
        let capped = grid.len() >= cfg.max_zeta_points;
        let grid = if capped {
            grid[..cfg.max_zeta_points].to_vec()
        } else {
            grid
        };
        let mut cf =
            empirical_characteristic_function(samples, &grid)?.with_apodization(cfg.apodization);
        if let Some(n_eff) = cfg.effective_samples {
            cf.sample_count = Some((n_eff.round() as usize).clamp(1, samples.len()));
        }
        let end = cf.zeta[cf.zeta.len() - 1];
        let needed = match cfg.apodization {
            Apodization::Fixed(w) => Some(WINDOW_EXTENT * w),
            Apodization::None => cf.decay_point(run).map(|z| z + run),
            Apodization::Auto { width_factor } => cf
                .decay_point(run)
                .map(|z| (z + run).max(WINDOW_EXTENT * width_factor * z)),
        };
        match needed {
            Some(z) if z <= end => {
                truncate(&mut cf, z);
                return Ok(cf);
            }
            _ if capped || matches!(cfg.apodization, Apodization::Fixed(_)) => return Ok(cf),
            _ => zeta_max = 2.0 * end,
        }
    }
}

/// Histogram, characteristic function and Hankel inversion of quadrature samples.
pub fn reconstruct_from_samples(
    samples: &[f64],
    cfg: &TomographyConfig,
) -> Result<TomographyResult> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: 2,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidDataset(
            "quadrature samples must be finite".into(),
        ));
    }
    if let Some(n) = cfg.effective_samples {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::invalid(
                "effective_samples",
                "must be finite and >= 1",
            ));
        }
    }
    if !(cfg.points_per_oscillation >= 1.0) {
        return Err(Error::invalid("points_per_oscillation", "must be >= 1"));
    }
    let radii = cfg.radial_grid(samples)?;
    let r_max = radii[radii.len() - 1];
    let histogram = if samples.len() >= MIN_HISTOGRAM_SAMPLES {
        Some(estimate_quadrature_pdf(samples, cfg.bin_rule)?)
    } else {
        None
    };
    let characteristic = adaptive_characteristic(samples, r_max, cfg)?;
    let reconstruction = hankel_reconstruct(&characteristic, &radii)?;
    Ok(TomographyResult {
        histogram,
        characteristic,
        reconstruction,
    })
}
