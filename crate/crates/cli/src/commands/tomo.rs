//! Tomographic reconstruction from quadrature samples or detector records.

use super::{write_density_raster, RunRecord, DENSITY_UNIT, LENGTH_UNIT};
use crate::config::{ApodizationKind, CalibrationKind, Config, PhaseMode};
use crate::error::{CliError, InSection, Result};
use crate::format::{number, write_key_values, Column, Table};
use crate::manifest::Outputs;
use optohopf_core::langevin::quadratures;
use optohopf_core::tomography::{
    demodulate_detector_signal, effective_sample_count, reconstruct_from_samples, Apodization,
    BinRule, Calibration, DemodulationConfig, TomographyConfig, TomographyResult,
    TomographyWarning,
};
use std::f64::consts::PI;
use std::path::Path;

pub const RECONSTRUCTION_FILE: &str = "reconstruction.csv";
pub const CHARACTERISTIC_FILE: &str = "characteristic.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const RASTER_FILE: &str = "raster.csv";
pub const AMPLITUDES_FILE: &str = "demodulated.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.txt";

/// Relative tolerance on the spacing of detector time stamps.
const UNIFORM_TIME_TOLERANCE: f64 = 1e-6;

/// Quadratures (in λ) read from a file, with how they were obtained.
pub struct LoadedQuadratures {
    pub values: Vec<f64>,
    /// Series whose autocorrelation sets the noise floor when it is not the
    /// quadratures themselves (the radii, for spread-phase projections).
    pub correlation_series: Option<Vec<f64>>,
    /// Demodulation diagnostics for detector input.
    pub demodulation: Option<DemodulationInfo>,
}

pub struct DemodulationInfo {
    pub t0: f64,
    pub dt: f64,
    /// Recovered amplitudes in λ.
    pub amplitudes: Vec<optohopf_core::Complex64>,
    pub harmonic_distortion: f64,
    pub reliable: bool,
    /// |⟨A/|A|⟩|: 0 for uniformly covered phase, 1 for a frozen phase.
    pub phase_coherence: f64,
}

/// Golden angle 2π(1 − 1/ϕ): consecutive projections never repeat.
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Records whose phase coherence exceeds this get a warning in fixed mode.
const PHASE_COHERENCE_WARNING: f64 = 0.2;

/// Reads `# sample_index,X` quadrature samples or a `# time_s,value`
/// detector record (demodulated with the config's optics and device).
pub fn load_quadratures(path: &Path, config: &Config) -> Result<LoadedQuadratures> {
    let table = Table::read(path)?;
    let lambda = config.device.wavelength_m;
    match table.names().as_slice() {
        ["sample_index", "X"] => {
            let unit_scale = match table.columns[1].unit.as_str() {
                "lambda" => 1.0,
                "m" => 1.0 / lambda,
                u => {
                    return Err(CliError::io(
                        path,
                        format!("column X has unit `{u}`; expected lambda or m"),
                    ))
                }
            };
            Ok(LoadedQuadratures {
                values: table.column(1).iter().map(|x| x * unit_scale).collect(),
                correlation_series: None,
                demodulation: None,
            })
        }
        ["time_s", "value"] => {
            if table.columns[0].unit != "s" {
                return Err(CliError::io(path, "column time_s must have unit s"));
            }
            let gain = match table.columns[1].unit.as_str() {
                "W" => 1.0,
                "V" => config.tomo.volts_per_watt,
                u => {
                    return Err(CliError::io(
                        path,
                        format!("column value has unit `{u}`; expected W or V"),
                    ))
                }
            };
            if !(gain > 0.0 && gain.is_finite()) {
                return Err(CliError::config(
                    "invalid key `tomo.volts_per_watt`: must be finite and > 0",
                ));
            }
            let t = table.column(0);
            let power: Vec<f64> = table.column(1).iter().map(|v| v / gain).collect();
            if t.len() < 2 {
                return Err(CliError::io(path, "need at least two detector samples"));
            }
            let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
            for (k, w) in t.windows(2).enumerate() {
                if ((w[1] - w[0]) - dt).abs()
                    > UNIFORM_TIME_TOLERANCE * dt.abs().max(f64::MIN_POSITIVE)
                {
                    // +3: two header lines and 1-based numbering
                    return Err(CliError::parse(
                        path,
                        k + 4,
                        "time stamps are not uniformly spaced",
                    ));
                }
            }
            let d = demodulate(&power, dt, config)?;
            let amplitudes: Vec<_> = d.amplitudes.iter().map(|a| a / lambda).collect();
            let values = match config.tomo.phase {
                PhaseMode::Fixed => quadratures(&amplitudes, config.tomo.phi),
                PhaseMode::Spread => amplitudes
                    .iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let phi = config.tomo.phi + GOLDEN_ANGLE * k as f64;
                        quadratures(std::slice::from_ref(a), phi)[0]
                    })
                    .collect(),
            };
            let unit_sum = amplitudes
                .iter()
                .filter(|a| a.norm() > 0.0)
                .fold(optohopf_core::Complex64::new(0.0, 0.0), |s, a| {
                    s + a / a.norm()
                });
            let phase_coherence = unit_sum.norm() / amplitudes.len().max(1) as f64;
            // the golden-angle sequence decorrelates the projections, but
            // not the radial fluctuations behind them
            let correlation_series = (config.tomo.phase == PhaseMode::Spread)
                .then(|| amplitudes.iter().map(|a| a.norm()).collect());
            Ok(LoadedQuadratures {
                values,
                correlation_series,
                demodulation: Some(DemodulationInfo {
                    t0: t[0] + d.t0,
                    dt: d.dt,
                    amplitudes,
                    harmonic_distortion: d.harmonic_distortion,
                    reliable: d.reliable,
                    phase_coherence,
                }),
            })
        }
        other => Err(CliError::io(
            path,
            format!(
                "unrecognized columns `{}`; expected `sample_index,X` or `time_s,value`",
                other.join(",")
            ),
        )),
    }
}

fn demodulate(
    power: &[f64],
    dt: f64,
    config: &Config,
) -> Result<optohopf_core::tomography::Demodulated> {
    let calibration = match config.tomo.calibration {
        CalibrationKind::Optics => {
            let (optics, op) = config.optics.cavity(&config.device)?;
            Calibration::at_operating_point(&optics, &op)
        }
        CalibrationKind::Scale => Calibration::Scale(config.tomo.metres_per_watt),
    };
    let carrier = 2.0 * PI * config.tomo.carrier_hz.unwrap_or(config.device.frequency_hz);
    let mut cfg = DemodulationConfig::new(carrier, calibration);
    cfg.cutoff = config.tomo.cutoff_hz.map(|f| 2.0 * PI * f);
    cfg.decimate = match config.tomo.decimate {
        Some(0) => {
            return Err(CliError::config(
                "invalid key `tomo.decimate`: must be >= 1",
            ));
        }
        Some(d) => d,
        // a quarter cutoff period: the low-passed record carries nothing faster
        None => ((0.5 * PI / (cfg.cutoff() * dt)).floor() as usize).max(1),
    };
    demodulate_detector_signal(power, dt, &cfg).in_section("tomo")
}

/// Tomography settings from the `[tomo]` section.
pub fn tomography_config(config: &Config) -> Result<TomographyConfig> {
    let t = &config.tomo;
    Ok(TomographyConfig {
        radii: None,
        radial_points: t.radial_points,
        r_max: t.r_max,
        points_per_oscillation: t.points_per_oscillation,
        apodization: match t.apodization {
            ApodizationKind::Auto => Apodization::Auto {
                width_factor: t.window,
            },
            ApodizationKind::None => Apodization::None,
            ApodizationKind::Fixed => Apodization::Fixed(t.window),
        },
        bin_rule: if t.bins == 0 {
            BinRule::FreedmanDiaconis
        } else {
            BinRule::Count(t.bins)
        },
        ..TomographyConfig::default()
    })
}

/// Reconstructs from loaded quadratures; with `tomo.autocorrelation` the
/// noise floor uses the effective sample count of the (ordered) record.
pub fn reconstruct_loaded(loaded: &LoadedQuadratures, config: &Config) -> Result<TomographyResult> {
    let series = loaded
        .correlation_series
        .as_deref()
        .unwrap_or(&loaded.values);
    reconstruct_with_floor(&loaded.values, series, config)
}

/// Reconstructs from an ordered quadrature record.
pub fn reconstruct_quadratures(values: &[f64], config: &Config) -> Result<TomographyResult> {
    reconstruct_with_floor(values, values, config)
}

fn reconstruct_with_floor(
    values: &[f64],
    series: &[f64],
    config: &Config,
) -> Result<TomographyResult> {
    if let ApodizationKind::Auto | ApodizationKind::Fixed = config.tomo.apodization {
        if !(config.tomo.window > 0.0 && config.tomo.window.is_finite()) {
            return Err(CliError::config(
                "invalid key `tomo.window`: must be finite and > 0",
            ));
        }
    }
    let mut cfg = tomography_config(config)?;
    if config.tomo.autocorrelation {
        cfg.effective_samples = Some(effective_sample_count(series));
    }
    reconstruct_from_samples(values, &cfg).in_section("tomo")
}

pub(crate) fn describe(w: &TomographyWarning) -> String {
    match w {
        TomographyWarning::NotDecayed {
            zeta_max,
            last_value,
        } => format!(
            "characteristic function not decayed at zeta_max = {} (|w| = {})",
            number(*zeta_max),
            number(*last_value)
        ),
        TomographyWarning::SparseZetaGrid {
            points_per_oscillation,
        } => format!(
            "sparse zeta grid: {} points per oscillation",
            number(*points_per_oscillation)
        ),
        TomographyWarning::Asymmetric { max_imag_residual } => format!(
            "asymmetric quadrature data: max |Im w| = {}",
            number(*max_imag_residual)
        ),
    }
}

pub(crate) fn run(config: &Config, out: &mut Outputs) -> Result<RunRecord> {
    let input = config.tomo.input.clone().ok_or_else(|| {
        CliError::config("invalid key `tomo.input`: no input file (use --input or tomo.input)")
    })?;
    let loaded = load_quadratures(&input, config)?;
    let res = reconstruct_loaded(&loaded, config)?;
    let rec = &res.reconstruction;

    Table::from_columns(
        vec![
            Column::new("r", LENGTH_UNIT),
            Column::new("P_raw", DENSITY_UNIT),
            Column::new("P_clipped", DENSITY_UNIT),
        ],
        &[&rec.raw.radii, &rec.raw.density, &rec.clipped.density],
    )
    .write(&out.file(RECONSTRUCTION_FILE))?;
    let cf = &res.characteristic;
    Table::from_columns(
        vec![
            Column::new("zeta", "lambda^-1"),
            Column::new("w", "1"),
            Column::new("imag_residual", "1"),
        ],
        &[&cf.zeta, &cf.values, &cf.imag_residual],
    )
    .write(&out.file(CHARACTERISTIC_FILE))?;
    if let Some(h) = &res.histogram {
        Table::from_columns(
            vec![Column::new("X", LENGTH_UNIT), Column::new("w", "lambda^-1")],
            &[&h.centers(), &h.density],
        )
        .write(&out.file(HISTOGRAM_FILE))?;
    }
    if config.tomo.raster_points >= 2 {
        write_density_raster(
            &out.file(RASTER_FILE),
            &rec.clipped,
            config.tomo.raster_points,
        )?;
    }

    let mut diag = vec![
        ("samples".to_string(), loaded.values.len().to_string()),
        (
            "noise_floor_samples".into(),
            cf.sample_count.map_or("-".into(), |n| n.to_string()),
        ),
        ("zeta_points".into(), cf.zeta.len().to_string()),
        ("zeta_max".into(), number(cf.zeta[cf.zeta.len() - 1])),
        ("window".into(), rec.window.map_or("none".into(), number)),
        ("raw_mass".into(), number(rec.raw.mass())),
        ("negativity_index".into(), number(rec.raw.negativity_index)),
        (
            "peak_radius".into(),
            number(super::peak_radius(&rec.clipped.radii, &rec.clipped.density)),
        ),
    ];
    for w in &rec.warnings {
        diag.push(("warning".into(), describe(w)));
    }
    if let Some(d) = &loaded.demodulation {
        let t: Vec<f64> = (0..d.amplitudes.len())
            .map(|k| d.t0 + k as f64 * d.dt)
            .collect();
        let re: Vec<f64> = d.amplitudes.iter().map(|a| a.re).collect();
        let im: Vec<f64> = d.amplitudes.iter().map(|a| a.im).collect();
        Table::from_columns(
            vec![
                Column::new("time_s", "s"),
                Column::new("re", LENGTH_UNIT),
                Column::new("im", LENGTH_UNIT),
            ],
            &[&t, &re, &im],
        )
        .write(&out.file(AMPLITUDES_FILE))?;
        let mean = d.amplitudes.iter().map(|a| a.norm()).sum::<f64>() / d.amplitudes.len() as f64;
        diag.push(("demodulated_mean_radius".into(), number(mean)));
        diag.push(("harmonic_distortion".into(), number(d.harmonic_distortion)));
        diag.push(("demodulation_reliable".into(), d.reliable.to_string()));
        diag.push(("phase_coherence".into(), number(d.phase_coherence)));
        if config.tomo.phase == PhaseMode::Fixed && d.phase_coherence > PHASE_COHERENCE_WARNING {
            diag.push((
                "warning".into(),
                "record covers few phase angles; consider tomo.phase = \"spread\"".into(),
            ));
        }
    }
    write_key_values(&out.file(DIAGNOSTICS_FILE), &diag)?;
    Ok(RunRecord {
        inputs: vec![input],
        seeds: Vec::new(),
    })
}
