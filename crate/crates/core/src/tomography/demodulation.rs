//! IQ demodulation of the reflected-power signal back to the slow amplitude.
//!
//! Linearizing P_R = P_L(1 − I(x)/β_F) about the static offset gives
//! δP_R ≈ −(P_L I₀′/β_F)·2Re A_lab, with A_lab = A e^{−iΩt}. Mixing the
//! calibrated signal y = Re A_lab with 2e^{iΩt} yields A plus a component at
//! 2Ω that the low-pass filter removes.

use crate::cavity::CavityOptics;
use crate::device::OperatingPoint;
use crate::error::{Error, Result};
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

/// Minimum samples per carrier period.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;

/// Second-to-first harmonic power ratio above which the linear inversion is
/// considered invalid.
pub const DISTORTION_LIMIT: f64 = 0.2;

/// Filter settling time that is discarded at each edge, in cutoff periods.
const EDGE_CUTOFF_PERIODS: f64 = 3.0;

/// Conversion from power fluctuation to displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    /// Linear-slope model: Re A = −β_F·δP/(2 P_L I₀′), in metres.
    Slope {
        laser_power: f64,
        finesse: f64,
        /// dI/dx at the operating point, 1/m.
        intensity_slope: f64,
    },
    /// Re A = scale·δP (metres per watt).
    Scale(f64),
}

impl Calibration {
    /// Slope calibration at a static operating point.
    pub fn at_operating_point(optics: &CavityOptics, op: &OperatingPoint) -> Self {
        Calibration::Slope {
            laser_power: op.laser_power,
            finesse: optics.finesse(),
            intensity_slope: optics.intensity_derivatives(op.offset).slope,
        }
    }

    /// Metres of Re A per watt of δP_R.
    pub fn metres_per_watt(&self) -> Result<f64> {
        let k = match *self {
            Calibration::Slope {
                laser_power,
                finesse,
                intensity_slope,
            } => -finesse / (2.0 * laser_power * intensity_slope),
            Calibration::Scale(k) => k,
        };
        if !k.is_finite() || k == 0.0 {
            return Err(Error::Demodulation(
                "calibration is singular (zero slope or laser power)",
            ));
        }
        Ok(k)
    }
}

/// Demodulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemodulationConfig {
    /// Carrier Ω in rad/s.
    pub carrier: f64,
    /// Low-pass cutoff in rad/s; default Ω/10.
    pub cutoff: Option<f64>,
    pub calibration: Calibration,
    /// Keep every `decimate`-th output sample.
    pub decimate: usize,
}

impl DemodulationConfig {
    pub fn new(carrier: f64, calibration: Calibration) -> Self {
        Self {
            carrier,
            cutoff: None,
            calibration,
            decimate: 1,
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(0.1 * self.carrier)
    }
}

/// Recovered slow amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    /// Slow complex amplitude A in metres.
    pub amplitudes: Vec<Complex64>,
    /// Time of the first retained sample, seconds.
    pub t0: f64,
    /// Spacing of the retained samples, seconds.
    pub dt: f64,
    /// Power ratio of the 2Ω to the Ω component of δP_R.
    pub harmonic_distortion: f64,
    /// False when the distortion exceeds [`DISTORTION_LIMIT`].
    pub reliable: bool,
}

/// Second-order Butterworth low-pass section (RBJ bilinear design).
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn lowpass(cutoff_hz: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * core::f64::consts::FRAC_1_SQRT_2);
        let a0 = 1.0 + alpha;
        let b1 = (1.0 - cos) / a0;
        Self {
            b: [0.5 * b1, b1, 0.5 * b1],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    /// Filters in place, starting from the steady state of the first sample.
    fn run<I: Iterator<Item = usize>>(&self, xs: &mut [Complex64], order: I) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let mut started = false;
        let (mut z1, mut z2) = (Complex64::default(), Complex64::default());
        for i in order {
            let x = xs[i];
            if !started {
                z2 = x * (b2 - a2);
                z1 = x * (b1 - a1) + z2;
                started = true;
            }
            let y = x * b0 + z1;
            z1 = x * b1 - y * a1 + z2;
            z2 = x * b2 - y * a2;
            xs[i] = y;
        }
    }

    /// Zero-phase forward–backward filtering.
    fn filtfilt(&self, xs: &mut [Complex64]) {
        let n = xs.len();
        self.run(xs, 0..n);
        self.run(xs, (0..n).rev());
    }
}

/// Mixes `signal` with e^{i·harmonic·Ωt} and low-pass filters it.
fn mix_and_filter(
    signal: &[f64],
    dt: f64,
    omega: f64,
    harmonic: f64,
    lp: &Biquad,
) -> Vec<Complex64> {
    let mut mixed: Vec<Complex64> = signal
        .iter()
        .enumerate()
        .map(|(k, &y)| Complex64::from_polar(y, harmonic * omega * k as f64 * dt))
        .collect();
    lp.filtfilt(&mut mixed);
    mixed
}

/// Recovers the slow amplitude A(t) from reflected power sampled every `dt`
/// seconds.
pub fn demodulate_detector_signal(
    power: &[f64],
    dt: f64,
    cfg: &DemodulationConfig,
) -> Result<Demodulated> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    if !(cfg.carrier > 0.0) || !cfg.carrier.is_finite() {
        return Err(Error::invalid("carrier", "must be finite and > 0"));
    }
    if cfg.decimate == 0 {
        return Err(Error::invalid("decimate", "must be >= 1"));
    }
    let per_period = 2.0 * PI / (cfg.carrier * dt);
    if per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::Demodulation(
            "signal must be sampled at ≥ 8 samples per carrier period",
        ));
    }
    let cutoff = cfg.cutoff();
    if !(cutoff > 0.0) || cutoff >= cfg.carrier {
        return Err(Error::invalid("cutoff", "must lie in (0, carrier)"));
    }
    if power.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidDataset(
            "detector samples must be finite".into(),
        ));
    }
    let sample_rate = 1.0 / dt;
    let cutoff_hz = cutoff / (2.0 * PI);
    let trim = (EDGE_CUTOFF_PERIODS * sample_rate / cutoff_hz).ceil() as usize;
    if power.len() <= 2 * trim + 1 {
        return Err(Error::Demodulation(
            "record too short for the low-pass settling time",
        ));
    }
    let k = cfg.calibration.metres_per_watt()?;
    let mean = power.iter().sum::<f64>() / power.len() as f64;
    let fluctuation: Vec<f64> = power.iter().map(|p| p - mean).collect();
    let lp = Biquad::lowpass(cutoff_hz, sample_rate);

    let first = mix_and_filter(&fluctuation, dt, cfg.carrier, 1.0, &lp);
    let second = mix_and_filter(&fluctuation, dt, cfg.carrier, 2.0, &lp);
    let kept = trim..power.len() - trim;
    let p1: f64 = first[kept.clone()].iter().map(|z| z.norm_sqr()).sum();
    let p2: f64 = second[kept.clone()].iter().map(|z| z.norm_sqr()).sum();
    let harmonic_distortion = if p1 > 0.0 { p2 / p1 } else { 0.0 };

    let amplitudes = first[kept]
        .iter()
        .step_by(cfg.decimate)
        .map(|z| z * (2.0 * k))
        .collect();
    Ok(Demodulated {
        amplitudes,
        t0: trim as f64 * dt,
        dt: dt * cfg.decimate as f64,
        harmonic_distortion,
        reliable: harmonic_distortion <= DISTORTION_LIMIT,
    })
}
