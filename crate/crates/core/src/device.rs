//! Mechanical and thermal device parameters, the thermal steady state and the
//! static optically-induced displacement.

use crate::cavity::CavityOptics;
use crate::error::{Error, Result};
use num_traits::Float;

/// Mechanical and thermal parameters of the suspended mirror (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Effective mass, kg.
    pub mass: f64,
    /// Bare angular resonance frequency ω₀, rad/s.
    pub omega0: f64,
    /// Linear amplitude damping rate γ₀, 1/s.
    pub gamma0: f64,
    /// Nonlinear quadratic damping rate γ₂, 1/(m²·s).
    pub gamma2: f64,
    /// Thermal relaxation rate κ, 1/s.
    pub kappa: f64,
    /// Heating coefficient η, K/(W·s).
    pub eta: f64,
    /// Thermal force per unit mass per kelvin θ, m/(s²·K).
    pub theta: f64,
    /// Frequency shift per kelvin β, rad/(s·K).
    pub beta_freq: f64,
    /// Base temperature T₀, K.
    pub t0: f64,
    /// Effective noise temperature, K.
    pub t_eff: f64,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega0", self.omega0),
            ("gamma0", self.gamma0),
            ("kappa", self.kappa),
            ("t0", self.t0),
            ("t_eff", self.t_eff),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        if !(self.gamma2 >= 0.0) || !self.gamma2.is_finite() {
            return Err(Error::invalid("gamma2", "must be finite and >= 0"));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("theta", self.theta),
            ("beta_freq", self.beta_freq),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Mechanical frequency at mirror temperature `t`: ω_m = ω₀ − β(T − T₀).
    pub fn mechanical_frequency(&self, t: f64) -> f64 {
        self.omega0 - self.beta_freq * (t - self.t0)
    }

    /// Thermal force per unit mass at temperature `t`: θ(T − T₀).
    pub fn thermal_force_per_mass(&self, t: f64) -> f64 {
        self.theta * (t - self.t0)
    }

    /// Mirror temperature where heating balances relaxation: T₀ + η P_L I(x_D)/κ.
    pub fn thermal_steady_temperature(&self, optics: &CavityOptics, op: &OperatingPoint) -> f64 {
        self.t0 + self.eta * op.laser_power * optics.intracavity_intensity(op.offset) / self.kappa
    }

    /// Optically-induced static displacement x₀ = ηθ P_L I₀ / (κ ω₀²), metres.
    pub fn static_displacement(&self, optics: &CavityOptics, op: &OperatingPoint) -> f64 {
        let i0 = optics.intracavity_intensity(op.offset);
        self.eta * self.theta * op.laser_power * i0 / (self.kappa * self.omega0 * self.omega0)
    }

    /// Evaluates the three small-signal conditions behind the amplitude
    /// equation against `threshold` (a "much less than" proxy, default 0.1).
    pub fn check_small_signal_assumptions(
        &self,
        optics: &CavityOptics,
        op: &OperatingPoint,
        threshold: f64,
    ) -> AssumptionReport {
        let i0 = optics.intracavity_intensity(op.offset);
        // β x₀ / (θ / 2ω₀) with x₀ expanded; θ cancels.
        let static_shift = 2.0 * (self.beta_freq * self.eta * op.laser_power * i0).abs()
            / (self.kappa * self.omega0);
        let thermal_force = self.theta.abs() * self.kappa * self.kappa
            / (self.beta_freq.abs() * self.omega0.powi(3) * optics.wavelength());
        let adiabatic = self.kappa / self.omega0;
        let degenerate = self.theta == 0.0 || self.beta_freq == 0.0;
        let check = |ratio: f64| ratio.is_finite() && ratio < threshold;
        AssumptionReport {
            threshold,
            static_shift_ratio: static_shift,
            thermal_force_ratio: thermal_force,
            adiabatic_ratio: adiabatic,
            static_shift_ok: check(static_shift),
            thermal_force_ok: check(thermal_force),
            adiabatic_ok: check(adiabatic),
            degenerate,
        }
    }
}

/// Ratios (left side over right side) of the conditions βx₀ ≪ θ/2ω₀,
/// θκ² ≪ βω₀³λ and κ ≪ ω₀, each compared against `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    pub threshold: f64,
    pub static_shift_ratio: f64,
    pub thermal_force_ratio: f64,
    pub adiabatic_ratio: f64,
    pub static_shift_ok: bool,
    pub thermal_force_ok: bool,
    pub adiabatic_ok: bool,
    /// θ = 0 or β = 0: the first two conditions hold trivially or are meaningless.
    pub degenerate: bool,
}

impl AssumptionReport {
    pub const DEFAULT_THRESHOLD: f64 = 0.1;

    pub fn all_ok(&self) -> bool {
        self.static_shift_ok && self.thermal_force_ok && self.adiabatic_ok
    }
}

/// Laser drive and static mirror offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Injected laser power P_L, W.
    pub laser_power: f64,
    /// Mirror offset x_D from the intensity maximum, m.
    pub offset: f64,
}

impl OperatingPoint {
    pub fn new(laser_power: f64, offset: f64) -> Result<Self> {
        if !(laser_power >= 0.0) || !laser_power.is_finite() {
            return Err(Error::invalid("laser_power", "must be finite and >= 0"));
        }
        if !offset.is_finite() {
            return Err(Error::invalid("offset", "must be finite"));
        }
        Ok(Self {
            laser_power,
            offset,
        })
    }
}
