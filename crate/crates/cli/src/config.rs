//! Run configuration: one TOML file with a section per module.
//!
//! Resolution order (later wins): built-in defaults, the config file,
//! `OPTOHOPF_SET_<SECTION>__<KEY>` environment variables, `--set
//! section.key=value` flags, then dedicated flags such as `--seed`. The
//! fully resolved configuration is echoed into every run manifest.

use crate::error::{CliError, Result};
use optohopf_core::fitting::{ControlAxis, FitParameter};
use optohopf_core::flow::reduced_noise_strength;
use optohopf_core::{CavityOptics, OperatingPoint, ReducedCoeffs};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Prefix of environment variables that override config keys.
pub const ENV_OVERRIDE_PREFIX: &str = "OPTOHOPF_SET_";

/// First line of an echoed config file.
pub const RESOLVED_CONFIG_FILE_HINT: &str =
    "# Fully resolved configuration; rerun with --config to reproduce this run.";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub device: DeviceSection,
    pub optics: OpticsSection,
    pub model: ModelSection,
    pub axis: AxisSection,
    pub theory: TheorySection,
    pub simulate: SimulateSection,
    pub tomo: TomoSection,
    pub fit: FitSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
}

/// Mechanical device and light source (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    /// Mechanical resonance ω₀/2π.
    pub frequency_hz: f64,
    /// Optical wavelength λ, also the reduced length unit.
    pub wavelength_m: f64,
    pub mass_kg: f64,
    pub t_eff_k: f64,
    /// Mechanical quality factor ω₀/γ₀; sets the time unit 1/γ₀ in seconds.
    pub quality_factor: f64,
}

impl Default for DeviceSection {
    fn default() -> Self {
        Self {
            frequency_hz: 144e3,
            wavelength_m: 1.55e-6,
            mass_kg: 1.1e-12,
            t_eff_k: 300.0,
            quality_factor: 200.0,
        }
    }
}

impl DeviceSection {
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }

    /// γ₀ = ω₀/Q in 1/s.
    pub fn gamma0(&self) -> Result<f64> {
        positive("device.quality_factor", self.quality_factor)?;
        positive("device.frequency_hz", self.frequency_hz)?;
        Ok(self.omega0() / self.quality_factor)
    }
}

/// Fabry–Pérot cavity and operating point for detector synthesis and
/// demodulation; `beta_plus` also shapes the detuning axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsSection {
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub finesse: f64,
    pub laser_power_w: f64,
    /// Detuning factor s_D of the operating point.
    pub detuning: f64,
}

impl Default for OpticsSection {
    fn default() -> Self {
        Self {
            beta_plus: 0.68,
            beta_minus: 0.0,
            finesse: 2.0,
            laser_power_w: 5e-3,
            detuning: 0.8,
        }
    }
}

impl OpticsSection {
    pub fn cavity(&self, device: &DeviceSection) -> Result<(CavityOptics, OperatingPoint)> {
        let optics = CavityOptics::new(
            self.beta_plus,
            self.beta_minus,
            self.finesse,
            device.wavelength_m,
        )
        .map_err(|e| CliError::from_core("optics", e))?;
        let op = OperatingPoint::new(
            self.laser_power_w,
            optics.offset_for_detuning(self.detuning),
        )
        .map_err(|e| CliError::from_core("optics", e))?;
        Ok((optics, op))
    }
}

/// Reduced amplitude-equation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// γ₂λ²/γ₀.
    pub g2: f64,
    /// Θ/(γ₀λ²); derived from the device section when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub th: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { g2: 8e4, th: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Control is ΔP_L/P_LC.
    Power,
    /// Control is the detuning factor s_D.
    Detuning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Control axis and the control values swept by `theory`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisSection {
    pub kind: AxisKind,
    /// Power axis: control value of the threshold (normally 0).
    /// Detuning axis: critical detuning s_c where the device crosses threshold.
    pub threshold: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<ControlRange>,
}

impl Default for AxisSection {
    fn default() -> Self {
        Self {
            kind: AxisKind::Power,
            threshold: 0.0,
            controls: Vec::new(),
            range: None,
        }
    }
}

impl AxisSection {
    pub fn control_axis(&self, optics: &OpticsSection) -> ControlAxis {
        match self.kind {
            AxisKind::Power => ControlAxis::PowerExcess,
            AxisKind::Detuning => ControlAxis::Detuning {
                beta_plus: optics.beta_plus,
            },
        }
    }

    /// Explicit controls followed by the range, if any.
    pub fn control_values(&self) -> Result<Vec<f64>> {
        let mut values = self.controls.clone();
        if let Some(r) = &self.range {
            if r.count == 0 {
                return Err(CliError::config(
                    "invalid key `axis.range.count`: must be >= 1",
                ));
            }
            if !r.start.is_finite() || !r.stop.is_finite() {
                return Err(CliError::config(
                    "invalid key `axis.range`: start and stop must be finite",
                ));
            }
            if r.count == 1 {
                values.push(r.start);
            } else {
                let h = (r.stop - r.start) / (r.count - 1) as f64;
                values.extend((0..r.count).map(|i| r.start + i as f64 * h));
            }
        }
        if values.is_empty() {
            return Err(CliError::config(
                "invalid key `axis.controls`: the control grid is empty (set axis.controls or axis.range)",
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config(format!(
                "invalid key `axis.controls`: {v} is not finite"
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheorySection {
    pub radial_points: usize,
    /// Shared radial extent in λ; default covers every control point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Raster side length; 0 disables raster export.
    pub raster_points: usize,
}

impl Default for TheorySection {
    fn default() -> Self {
        Self {
            radial_points: 2048,
            r_max: None,
            raster_points: 201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    EulerMaruyama,
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Origin,
    LimitCycle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Operating point on the control axis.
    pub control: f64,
    /// Reduced time step (units of 1/γ₀).
    pub dt: f64,
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub burn_in_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    pub integrator: IntegratorKind,
    pub initial: InitialState,
    /// Homodyne phase of the exported quadrature samples.
    pub phi: f64,
    /// Number of trajectory-0 steps written as a time series (0 = none).
    pub trajectory_steps: usize,
    /// Also synthesize the reflected-power detector signal of trajectory 0.
    pub detector: bool,
    /// Detector samples per integration step.
    pub detector_oversample: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            control: 0.15,
            dt: 1e-2,
            n_steps: 100_000,
            n_trajectories: 16,
            burn_in_steps: 10_000,
            record_stride: None,
            integrator: IntegratorKind::EulerMaruyama,
            initial: InitialState::Origin,
            phi: 0.0,
            trajectory_steps: 0,
            detector: false,
            detector_oversample: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApodizationKind {
    Auto,
    None,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationKind {
    /// Slope of the cavity response at the configured operating point.
    Optics,
    /// Fixed metres of amplitude per watt of power modulation.
    Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Every demodulated amplitude is projected at `tomo.phi`.
    Fixed,
    /// Amplitude k is projected at φ + k·(golden angle), so a record whose
    /// phase hardly drifts still covers all angles (assumes P is
    /// rotationally symmetric).
    Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomoSection {
    /// Input file (`--input` overrides).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub radial_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    pub points_per_oscillation: f64,
    pub apodization: ApodizationKind,
    /// Auto: multiple of the decay point. Fixed: window width ζ_w.
    pub window: f64,
    /// Histogram bins; 0 uses the Freedman–Diaconis rule.
    pub bins: usize,
    pub raster_points: usize,
    /// Homodyne phase applied to demodulated amplitudes.
    pub phi: f64,
    pub phase: PhaseMode,
    /// Demodulation carrier; default is the device frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_hz: Option<f64>,
    pub calibration: CalibrationKind,
    /// Metres per watt when `calibration = "scale"`.
    pub metres_per_watt: f64,
    /// Detector gain for voltage input.
    pub volts_per_watt: f64,
    /// Keep every n-th demodulated sample; default spaces them a quarter
    /// of a low-pass cutoff period apart.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimate: Option<usize>,
    /// Base the noise floor on N/(2τ) with τ the integrated
    /// autocorrelation time of the quadrature record.
    pub autocorrelation: bool,
}

impl Default for TomoSection {
    fn default() -> Self {
        Self {
            input: None,
            radial_points: 512,
            r_max: None,
            points_per_oscillation: 8.0,
            apodization: ApodizationKind::Auto,
            window: optohopf_core::tomography::DEFAULT_WINDOW_FACTOR,
            bins: 0,
            raster_points: 201,
            phi: 0.0,
            phase: PhaseMode::Fixed,
            carrier_hz: None,
            cutoff_hz: None,
            calibration: CalibrationKind::Optics,
            metres_per_watt: 1.0,
            volts_per_watt: 1.0,
            decimate: None,
            autocorrelation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Sweep directory containing `sweep.toml` (`--input` overrides).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<PathBuf>,
    /// Initial th; defaults to the model value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub th: Option<f64>,
    /// Initial g2; defaults to the model value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    pub scale: f64,
    /// Initial offset; defaults to `axis.threshold`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// th, g2 and scale are bounded to [x/span, x·span].
    pub span: f64,
    /// Offset bounds (needed when the offset is free).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_bounds: Option<[f64; 2]>,
    pub free: Vec<String>,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seeds_per_parameter: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            sweep: None,
            th: None,
            g2: None,
            scale: 1.0,
            offset: None,
            span: 10.0,
            offset_bounds: None,
            free: vec!["th".into(), "g2".into()],
            max_iterations: 500,
            tolerance: 1e-4,
            seeds_per_parameter: optohopf_core::fitting::SEEDS_PER_PARAMETER,
        }
    }
}

impl FitSection {
    pub fn free_parameters(&self) -> Result<Vec<FitParameter>> {
        self.free
            .iter()
            .map(|name| {
                FitParameter::ALL
                    .into_iter()
                    .find(|p| p.name() == name)
                    .ok_or_else(|| {
                        CliError::config(format!(
                            "invalid key `fit.free`: unknown parameter `{name}` (expected th, g2, scale or offset)"
                        ))
                    })
            })
            .collect()
    }
}

impl Config {
    /// Reduced noise strength: `model.th`, or k_B T_eff/(4mω₀²λ²).
    pub fn th(&self) -> Result<f64> {
        match self.model.th {
            Some(th) => positive("model.th", th).map(|_| th),
            None => reduced_noise_strength(
                self.device.t_eff_k,
                self.device.mass_kg,
                self.device.omega0(),
                self.device.wavelength_m,
            )
            .map_err(|e| CliError::from_core("device", e)),
        }
    }

    pub fn control_axis(&self) -> ControlAxis {
        self.axis.control_axis(&self.optics)
    }

    /// Reduced coefficients at a control value.
    pub fn coefficients(&self, control: f64) -> Result<ReducedCoeffs> {
        positive("model.g2", self.model.g2)?;
        let g0 = self
            .control_axis()
            .linear_coefficient(control, self.axis.threshold)
            .map_err(|e| CliError::config(format!("invalid key `axis.threshold`: {e}")))?;
        Ok(ReducedCoeffs::new(g0, self.model.g2, self.th()?))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "invalid key `{key}`: must be finite and > 0"
        )))
    }
}

/// Parses `value` as a TOML value, falling back to a plain string.
fn parse_value(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(value.to_string()),
    }
}

/// Sets a dotted `section.key` (or `section.sub.key`) in a TOML table.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment.split_once('=').ok_or_else(|| {
        CliError::config(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!(
            "override key `{key}` is malformed"
        )));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| {
            CliError::config(format!("override key `{key}`: `{part}` is not a section"))
        })?;
    }
    node.insert(path[path.len() - 1].to_string(), parse_value(value.trim()));
    Ok(())
}

/// `OPTOHOPF_SET_SIMULATE__DT=1e-3` → `simulate.dt=1e-3`.
pub fn env_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<String> {
    let mut out: Vec<String> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            k.strip_prefix(ENV_OVERRIDE_PREFIX)
                .map(|rest| format!("{}={v}", rest.to_lowercase().replace("__", ".")))
        })
        .collect();
    out.sort();
    out
}

/// Loads the config file (if any) and applies overrides in order.
pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Config::deserialize(toml::Value::Table(table)).map_err(|e| CliError::config(e.to_string()))
}
