//! Ensemble integration of the complex-amplitude Langevin equation
//!
//! ```text
//! da/dτ = −(g0 + g2|a|² + i(w0 + w2|a|²)) a + ξ,   ⟨ξ_x ξ_x⟩ = ⟨ξ_y ξ_y⟩ = 2 th δ
//! ```
//!
//! in reduced units (time 1/γ₀, amplitude λ), plus the quadrature and
//! reflected-power observables derived from trajectories.
//!
//! Every trajectory draws from its own ChaCha8 stream selected by
//! (seed, trajectory index), so ensembles are bit-identical whether they are
//! run serially or in parallel.

use crate::cavity::CavityOptics;
use crate::device::OperatingPoint;
use crate::error::{Error, Result};
use crate::flow::ReducedCoeffs;
use crate::par;
use crate::special::ln_erfcx;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use num_complex::Complex64;
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// Upper bound on dt × (fastest drift rate) checked before a run.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Divergence is declared when |a| exceeds this multiple of the amplitude scale.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    EulerMaruyama,
    /// Stochastic Heun (predictor–corrector on the drift, shared increment).
    Heun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Reduced time step (units of 1/γ₀).
    pub dt: f64,
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub burn_in_steps: usize,
    pub seed: u64,
    /// Drop the common w0 rotation.
    pub rotating_frame: bool,
    /// Steps between recorded samples; `None` picks a quarter of the
    /// relaxation time, ⌈1/(4·rate·dt)⌉.
    pub record_stride: Option<usize>,
    pub integrator: Integrator,
    pub initial: Complex64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            n_steps: 100_000,
            n_trajectories: 1,
            burn_in_steps: 10_000,
            seed: 0,
            rotating_frame: true,
            record_stride: None,
            integrator: Integrator::EulerMaruyama,
            initial: Complex64::new(0.0, 0.0),
        }
    }
}

impl SimConfig {
    pub fn stride_for(&self, rc: &ReducedCoeffs) -> usize {
        self.record_stride.unwrap_or_else(|| {
            (1.0 / (4.0 * relaxation_rate(rc) * self.dt))
                .ceil()
                .max(1.0) as usize
        })
    }

    fn validate(&self, rc: &ReducedCoeffs) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        if self.n_trajectories == 0 {
            return Err(Error::invalid("n_trajectories", "must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be >= 1"));
        }
        if self.burn_in_steps >= self.n_steps {
            return Err(Error::invalid("burn_in_steps", "must be < n_steps"));
        }
        if self.record_stride == Some(0) {
            return Err(Error::invalid("record_stride", "must be >= 1"));
        }
        let a_max = (3.0 * amplitude_scale(rc)).max(self.initial.norm());
        let rate = rc.g0.abs().max(rc.g2 * a_max * a_max);
        if !(self.dt * rate < STABILITY_LIMIT) {
            return Err(Error::invalid(
                "dt",
                alloc::format!(
                    "dt·max(|g0|, g2·a_max²) = {:.3e} exceeds the stability limit {STABILITY_LIMIT}",
                    self.dt * rate
                ),
            ));
        }
        Ok(())
    }
}

/// Rejects coefficients for which the drift does not confine the amplitude:
/// g2 < 0, or g2 = 0 without positive linear damping. The linear
/// Ornstein–Uhlenbeck case (g2 = 0, g0 > 0) is accepted.
pub fn check_confining(rc: &ReducedCoeffs) -> Result<()> {
    for (name, v) in [
        ("g0", rc.g0),
        ("g2", rc.g2),
        ("th", rc.th),
        ("w0", rc.w0),
        ("w2", rc.w2),
    ] {
        if !v.is_finite() {
            return Err(Error::invalid(name, "must be finite"));
        }
    }
    if rc.th < 0.0 {
        return Err(Error::invalid("th", "noise strength must be >= 0"));
    }
    if rc.g2 < 0.0 || (rc.g2 == 0.0 && rc.g0 <= 0.0) {
        return Err(Error::OutOfModel("drift does not confine the amplitude"));
    }
    Ok(())
}

/// Typical steady-state amplitude: √⟨|a|²⟩ of the stationary density (noise
/// present), otherwise the ring radius.
pub fn amplitude_scale(rc: &ReducedCoeffs) -> f64 {
    let ring = rc.limit_cycle_radius().unwrap_or(0.0);
    let stat = if rc.th > 0.0 && rc.g2 > 0.0 {
        let nu = rc.g0 / (4.0 * rc.g2 * rc.th).sqrt();
        let inv = (-ln_erfcx(nu)).exp() / PI.sqrt();
        (2.0 * (rc.th / rc.g2).sqrt() * (inv - nu)).sqrt()
    } else if rc.th > 0.0 && rc.g0 > 0.0 {
        (2.0 * rc.th / rc.g0).sqrt()
    } else {
        0.0
    };
    ring.max(stat)
}

/// Radial relaxation rate: |g0|, or the critical rate √(g2·th) near threshold.
pub fn relaxation_rate(rc: &ReducedCoeffs) -> f64 {
    rc.g0.abs().max((rc.g2 * rc.th).sqrt())
}

/// A recorded amplitude path.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    /// a(τ) at τ = k·dt_effective, starting with the initial condition.
    pub samples: Vec<Complex64>,
    pub dt_effective: f64,
    pub seed: u64,
    pub trajectory_index: usize,
    pub rotating_frame: bool,
    pub coeffs: ReducedCoeffs,
}

impl AmplitudeTrajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| k as f64 * self.dt_effective)
    }
}

/// Samples of X_φ = √2·Re(a e^{−iφ}).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSeries {
    pub phi: f64,
    pub values: Vec<f64>,
    pub dt_effective: f64,
}

pub fn quadrature(a: Complex64, phi: f64) -> f64 {
    SQRT_2 * (a * Complex64::from_polar(1.0, -phi)).re
}

pub fn quadratures(samples: &[Complex64], phi: f64) -> Vec<f64> {
    let rot = Complex64::from_polar(1.0, -phi);
    samples.iter().map(|&a| SQRT_2 * (a * rot).re).collect()
}

pub fn quadrature_series(traj: &AmplitudeTrajectory, phi: f64) -> QuadratureSeries {
    QuadratureSeries {
        phi,
        values: quadratures(&traj.samples, phi),
        dt_effective: traj.dt_effective,
    }
}

struct Stepper {
    g0: f64,
    g2: f64,
    w0: f64,
    w2: f64,
    dt: f64,
    noise: f64,
    heun: bool,
    limit: f64,
}

impl Stepper {
    fn new(rc: &ReducedCoeffs, cfg: &SimConfig) -> Self {
        let scale = amplitude_scale(rc).max(cfg.initial.norm());
        Self {
            g0: rc.g0,
            g2: rc.g2,
            w0: if cfg.rotating_frame { 0.0 } else { rc.w0 },
            w2: rc.w2,
            dt: cfg.dt,
            noise: (2.0 * rc.th * cfg.dt).sqrt(),
            heun: cfg.integrator == Integrator::Heun,
            limit: DIVERGENCE_FACTOR * scale,
        }
    }

    // Radial part −Γ_eff·a only; the Ω_eff rotation is applied exactly.
    #[inline]
    fn damping(&self, a: Complex64) -> Complex64 {
        -(self.g0 + self.g2 * a.norm_sqr()) * a
    }

    #[inline]
    fn frequency(&self, a: Complex64) -> f64 {
        self.w0 + self.w2 * a.norm_sqr()
    }

    #[inline]
    fn step(&self, a: Complex64, rng: &mut ChaCha8Rng) -> Complex64 {
        let (nx, ny): (f64, f64) = if self.noise > 0.0 {
            (StandardNormal.sample(rng), StandardNormal.sample(rng))
        } else {
            (0.0, 0.0)
        };
        let kick = Complex64::new(nx, ny) * self.noise;
        let f = self.damping(a);
        let (next, omega) = if self.heun {
            let pred = a + f * self.dt + kick;
            (
                a + (f + self.damping(pred)) * (0.5 * self.dt) + kick,
                0.5 * (self.frequency(a) + self.frequency(pred)),
            )
        } else {
            (a + f * self.dt + kick, self.frequency(a))
        };
        if omega == 0.0 {
            next
        } else {
            next * Complex64::from_polar(1.0, -omega * self.dt)
        }
    }
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Integrates one trajectory, calling `record(step, a)` after every step
/// (and once for the initial condition with step 0).
fn integrate_path<F: FnMut(usize, Complex64)>(
    rc: &ReducedCoeffs,
    cfg: &SimConfig,
    index: usize,
    record: F,
) -> Result<()> {
    run_stepper(&Stepper::new(rc, cfg), cfg, index, record)
}

fn run_stepper<F: FnMut(usize, Complex64)>(
    stepper: &Stepper,
    cfg: &SimConfig,
    index: usize,
    mut record: F,
) -> Result<()> {
    let mut rng = stream(cfg.seed, index);
    let mut a = cfg.initial;
    record(0, a);
    for step in 1..=cfg.n_steps {
        a = stepper.step(a, &mut rng);
        let r = a.norm();
        if !(r <= stepper.limit) {
            return Err(Error::Divergence {
                trajectory: index,
                step,
                amplitude: r,
            });
        }
        record(step, a);
    }
    Ok(())
}

/// Simulates trajectory `index` of the ensemble described by `cfg`, recording
/// every `record_stride` steps from the initial condition on.
pub fn simulate_trajectory(
    rc: &ReducedCoeffs,
    cfg: &SimConfig,
    index: usize,
) -> Result<AmplitudeTrajectory> {
    check_confining(rc)?;
    cfg.validate(rc)?;
    let stride = cfg.stride_for(rc);
    let mut samples = Vec::with_capacity(cfg.n_steps / stride + 1);
    integrate_path(rc, cfg, index, |step, a| {
        if step % stride == 0 {
            samples.push(a);
        }
    })?;
    Ok(AmplitudeTrajectory {
        samples,
        dt_effective: stride as f64 * cfg.dt,
        seed: cfg.seed,
        trajectory_index: index,
        rotating_frame: cfg.rotating_frame,
        coeffs: *rc,
    })
}

/// First trajectory of the ensemble.
pub fn simulate_amplitude(rc: &ReducedCoeffs, cfg: &SimConfig) -> Result<AmplitudeTrajectory> {
    simulate_trajectory(rc, cfg, 0)
}

/// All trajectories, in index order.
pub fn simulate_ensemble(rc: &ReducedCoeffs, cfg: &SimConfig) -> Result<Vec<AmplitudeTrajectory>> {
    check_confining(rc)?;
    cfg.validate(rc)?;
    par::map_indexed(cfg.n_trajectories, |i| simulate_trajectory(rc, cfg, i))
        .into_iter()
        .collect()
}

/// Post-burn-in samples pooled over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSamples {
    /// Trajectory-major: all samples of trajectory 0, then 1, ...
    pub samples: Vec<Complex64>,
    pub per_trajectory: usize,
    pub stride: usize,
    /// burn-in shorter than 10 relaxation times
    pub short_burn_in: bool,
}

/// Runs the ensemble and pools states recorded every `stride` steps after
/// burn-in: n_trajectories·⌊(n_steps − burn_in)/stride⌋ samples.
pub fn ensemble_steady_samples(rc: &ReducedCoeffs, cfg: &SimConfig) -> Result<EnsembleSamples> {
    check_confining(rc)?;
    cfg.validate(rc)?;
    let stride = cfg.stride_for(rc);
    let per = (cfg.n_steps - cfg.burn_in_steps) / stride;
    let burn = cfg.burn_in_steps;
    let chunks = par::map_indexed(cfg.n_trajectories, |i| {
        let mut out = Vec::with_capacity(per);
        integrate_path(rc, cfg, i, |step, a| {
            if step > burn && (step - burn) % stride == 0 {
                out.push(a);
            }
        })
        .map(|_| out)
    });
    let mut samples = Vec::with_capacity(per * cfg.n_trajectories);
    for chunk in chunks {
        samples.extend(chunk?);
    }
    Ok(EnsembleSamples {
        samples,
        per_trajectory: per,
        stride,
        short_burn_in: (burn as f64) * cfg.dt * relaxation_rate(rc) < 10.0,
    })
}

/// Histogram of |a| with per-area density normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialHistogram {
    pub edges: Vec<f64>,
    /// Fraction of samples per bin.
    pub mass: Vec<f64>,
    /// Samples beyond the last edge.
    pub overflow: f64,
}

impl RadialHistogram {
    pub fn new(samples: &[Complex64], r_max: f64, bins: usize) -> Self {
        let edges = crate::quadrature::linspace(0.0, r_max, bins + 1);
        let mut counts = alloc::vec![0u64; bins];
        let mut overflow = 0u64;
        let width = r_max / bins as f64;
        for a in samples {
            let k = (a.norm() / width) as usize;
            if k < bins {
                counts[k] += 1;
            } else {
                overflow += 1;
            }
        }
        let n = samples.len().max(1) as f64;
        Self {
            edges,
            mass: counts.iter().map(|&c| c as f64 / n).collect(),
            overflow: overflow as f64 / n,
        }
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// Density per unit area in each bin.
    pub fn area_density(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .zip(&self.mass)
            .map(|(e, m)| m / (PI * (e[1] * e[1] - e[0] * e[0])))
            .collect()
    }

    /// Center of the bin with the largest per-area density.
    pub fn modal_radius(&self) -> f64 {
        let d = self.area_density();
        let (i, _) =
            d.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |a, (i, &v)| if v > a.1 { (i, v) } else { a },
            );
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Σ|empirical − model| bin masses, with model masses from `bin_mass(lo, hi)`.
    pub fn l1_distance<F: Fn(f64, f64) -> f64>(&self, bin_mass: F) -> f64 {
        let inside: f64 = self
            .edges
            .windows(2)
            .zip(&self.mass)
            .map(|(e, &m)| (m - bin_mass(e[0], e[1])).abs())
            .sum();
        let model_inside: f64 = self.edges.windows(2).map(|e| bin_mass(e[0], e[1])).sum();
        inside + (self.overflow - (1.0 - model_inside)).abs()
    }
}

/// Maps a reduced trajectory to reflected optical power P_R(t) in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub optics: CavityOptics,
    /// Laser power and static mirror offset (including the static displacement).
    pub operating_point: OperatingPoint,
    /// γ₀ in 1/s, converts reduced time to seconds.
    pub gamma0: f64,
    /// Mechanical carrier Ω₀ in rad/s, applied to rotating-frame trajectories.
    pub carrier: f64,
    /// Output samples per recorded trajectory interval (linear interpolation
    /// of the slow amplitude in between).
    pub oversample: usize,
}

/// Uniformly sampled detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSignal {
    pub dt: f64,
    pub power: Vec<f64>,
}

impl DetectorSignal {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.power.len()).map(move |k| k as f64 * self.dt)
    }
}

impl DetectorModel {
    fn check(&self) -> Result<()> {
        if !(self.gamma0 > 0.0) {
            return Err(Error::invalid("gamma0", "must be > 0"));
        }
        if self.oversample == 0 {
            return Err(Error::invalid("oversample", "must be >= 1"));
        }
        if !self.carrier.is_finite() {
            return Err(Error::invalid("carrier", "must be finite"));
        }
        Ok(())
    }

    /// Reflected power for a lab-frame amplitude A (metres).
    pub fn reflected_power(&self, amplitude: Complex64) -> f64 {
        let x = self.operating_point.offset + 2.0 * amplitude.re;
        self.operating_point.laser_power * self.optics.reflection_probability(x)
    }

    /// P_R(t) = P_L·R_C(x_D + 2 Re A(t)) along the trajectory.
    pub fn synthesize(&self, traj: &AmplitudeTrajectory) -> Result<DetectorSignal> {
        self.check()?;
        let lambda = self.optics.wavelength();
        let dt = traj.dt_effective / self.gamma0 / self.oversample as f64;
        let m = self.oversample;
        let n = traj.samples.len();
        let mut power = Vec::with_capacity(n.saturating_sub(1) * m + 1);
        let carrier = if traj.rotating_frame {
            self.carrier
        } else {
            0.0
        };
        for k in 0..n {
            let sub = if k + 1 < n { m } else { 1 };
            for j in 0..sub {
                let t = j as f64 / m as f64;
                let slow = if j == 0 {
                    traj.samples[k]
                } else {
                    traj.samples[k] * (1.0 - t) + traj.samples[k + 1] * t
                };
                let time = (k * m + j) as f64 * dt;
                let lab = slow * lambda * Complex64::from_polar(1.0, -carrier * time);
                power.push(self.reflected_power(lab));
            }
        }
        Ok(DetectorSignal { dt, power })
    }
}

/// Standalone form of [`DetectorModel::synthesize`].
pub fn synthesize_detector_signal(
    traj: &AmplitudeTrajectory,
    model: &DetectorModel,
) -> Result<DetectorSignal> {
    model.synthesize(traj)
}
