//! Effective amplitude-flow coefficients of the slow complex amplitude,
//! noise strength, Hopf threshold and limit-cycle geometry.

use crate::cavity::CavityOptics;
use crate::device::{DeviceParams, OperatingPoint};
use crate::error::{Error, Result};
use crate::BOLTZMANN;
use num_traits::Float;

/// Coefficients of Ȧ + (Γ_eff + iΩ_eff)A = ξ with Γ_eff = Γ₀ + Γ₂|A|²,
/// Ω_eff = Ω₀ + Ω₂|A|² and ⟨ξ_x ξ_x⟩ = ⟨ξ_y ξ_y⟩ = 2Θδ (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowCoeffs {
    /// Γ₀, 1/s.
    pub gamma0: f64,
    /// Γ₂, 1/(m²·s).
    pub gamma2: f64,
    /// Ω₀, rad/s.
    pub omega0: f64,
    /// Ω₂, rad/(m²·s).
    pub omega2: f64,
    /// Noise strength Θ, m²/s.
    pub theta: f64,
}

/// Stability of the amplitude equation at Γ₀ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bifurcation {
    /// Γ₂ > 0: a stable limit cycle is born as Γ₀ changes sign.
    Supercritical,
    /// Γ₂ ≤ 0: no quartic confinement; the steady state is not normalizable.
    OutOfModel,
}

impl FlowCoeffs {
    /// Evaluates the coefficients with I₀, I₀′, I₀″ taken at the operating offset.
    pub fn from_device(dev: &DeviceParams, optics: &CavityOptics, op: &OperatingPoint) -> Self {
        let e = optics.intensity_derivatives(op.offset);
        let p = op.laser_power;
        let w2 = dev.omega0 * dev.omega0;
        FlowCoeffs {
            gamma0: dev.gamma0 + dev.eta * dev.theta * p * e.slope / (2.0 * w2),
            gamma2: dev.gamma2 + dev.eta * dev.beta_freq * p * e.curvature / (4.0 * dev.omega0),
            omega0: dev.omega0 - dev.eta * dev.beta_freq * p * e.value / dev.kappa,
            omega2: -dev.eta * dev.beta_freq * p * e.curvature / dev.kappa,
            theta: noise_strength(dev),
        }
    }

    pub fn nu(&self) -> Option<f64> {
        shape_nu(self.gamma0, self.gamma2, self.theta)
    }

    /// δ₀² = 2Θ/Γ₀, signed (negative above threshold). `None` at Γ₀ = 0.
    pub fn delta0_sq(&self) -> Option<f64> {
        (self.gamma0 != 0.0).then(|| 2.0 * self.theta / self.gamma0)
    }

    /// Noise-free limit-cycle radius r₀ = √(−Γ₀/Γ₂), metres.
    pub fn limit_cycle_radius(&self) -> Option<f64> {
        ring_radius(self.gamma0, self.gamma2)
    }

    pub fn bifurcation(&self) -> Bifurcation {
        classify(self.gamma2)
    }

    pub fn is_out_of_model(&self) -> bool {
        self.bifurcation() == Bifurcation::OutOfModel
    }

    /// Nondimensionalizes with time in units of 1/γ₀ and length in units of λ.
    pub fn reduce(&self, gamma0: f64, wavelength: f64) -> Result<ReducedCoeffs> {
        check_scales(gamma0, wavelength)?;
        let l2 = wavelength * wavelength;
        Ok(ReducedCoeffs {
            g0: self.gamma0 / gamma0,
            g2: self.gamma2 * l2 / gamma0,
            th: self.theta / (gamma0 * l2),
            w0: self.omega0 / gamma0,
            w2: self.omega2 * l2 / gamma0,
        })
    }
}

/// Θ = γ₀ k_B T_eff / (4 m ω₀²).
pub fn noise_strength(dev: &DeviceParams) -> f64 {
    dev.gamma0 * BOLTZMANN * dev.t_eff / (4.0 * dev.mass * dev.omega0 * dev.omega0)
}

/// Reduced noise strength th = Θ/(γ₀λ²) = k_B T_eff / (4 m ω₀² λ²); γ₀ cancels.
pub fn reduced_noise_strength(t_eff: f64, mass: f64, omega0: f64, wavelength: f64) -> Result<f64> {
    for (name, v) in [
        ("t_eff", t_eff),
        ("mass", mass),
        ("omega0", omega0),
        ("wavelength", wavelength),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(name, "must be finite and > 0"));
        }
    }
    Ok(BOLTZMANN * t_eff / (4.0 * mass * omega0 * omega0 * wavelength * wavelength))
}

/// Laser power at which Γ₀ vanishes for a mirror offset `x_d`, or `None` when
/// the optical feedback only adds damping (ηθI₀′ ≥ 0).
pub fn threshold_power(dev: &DeviceParams, optics: &CavityOptics, x_d: f64) -> Option<f64> {
    let drive = dev.eta * dev.theta * optics.intensity_derivatives(x_d).slope;
    (drive < 0.0).then(|| -2.0 * dev.gamma0 * dev.omega0 * dev.omega0 / drive)
}

/// Flow coefficients in reduced units: time in 1/γ₀, amplitude in λ.
///
/// `g0 = Γ₀/γ₀`, `g2 = Γ₂λ²/γ₀`, `th = Θ/(γ₀λ²)`, `w0 = Ω₀/γ₀`, `w2 = Ω₂λ²/γ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoeffs {
    pub g0: f64,
    pub g2: f64,
    pub th: f64,
    pub w0: f64,
    pub w2: f64,
}

impl ReducedCoeffs {
    /// Radial coefficients only; no frequency terms.
    pub fn new(g0: f64, g2: f64, th: f64) -> Self {
        Self {
            g0,
            g2,
            th,
            w0: 0.0,
            w2: 0.0,
        }
    }

    /// Coefficients on the laser-power axis where g0 = 1 − P_L/P_LC = −ΔP_L/P_LC.
    pub fn at_power_excess(excess_ratio: f64, g2: f64, th: f64) -> Self {
        Self::new(-excess_ratio, g2, th)
    }

    /// Coefficients with g2 = 1 and noise `th`, with g0 chosen so that the
    /// steady state has shape parameter `nu`.
    pub fn with_nu(nu: f64, th: f64) -> Self {
        let g0 = nu * (4.0 * th).sqrt();
        Self::new(g0, 1.0, th)
    }

    pub fn expand(&self, gamma0: f64, wavelength: f64) -> Result<FlowCoeffs> {
        check_scales(gamma0, wavelength)?;
        let l2 = wavelength * wavelength;
        Ok(FlowCoeffs {
            gamma0: self.g0 * gamma0,
            gamma2: self.g2 * gamma0 / l2,
            omega0: self.w0 * gamma0,
            omega2: self.w2 * gamma0 / l2,
            theta: self.th * gamma0 * l2,
        })
    }

    pub fn nu(&self) -> Option<f64> {
        shape_nu(self.g0, self.g2, self.th)
    }

    pub fn delta0_sq(&self) -> Option<f64> {
        (self.g0 != 0.0).then(|| 2.0 * self.th / self.g0)
    }

    pub fn limit_cycle_radius(&self) -> Option<f64> {
        ring_radius(self.g0, self.g2)
    }

    pub fn bifurcation(&self) -> Bifurcation {
        classify(self.g2)
    }

    pub fn is_out_of_model(&self) -> bool {
        self.bifurcation() == Bifurcation::OutOfModel
    }
}

fn check_scales(gamma0: f64, wavelength: f64) -> Result<()> {
    if !(gamma0 > 0.0) || !gamma0.is_finite() {
        return Err(Error::invalid(
            "gamma0",
            "reduction scale must be finite and > 0",
        ));
    }
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::invalid(
            "wavelength",
            "reduction scale must be finite and > 0",
        ));
    }
    Ok(())
}

fn shape_nu(linear: f64, quartic: f64, noise: f64) -> Option<f64> {
    (quartic > 0.0 && noise > 0.0).then(|| linear / (4.0 * quartic * noise).sqrt())
}

fn ring_radius(linear: f64, quartic: f64) -> Option<f64> {
    (linear < 0.0 && quartic > 0.0).then(|| (-linear / quartic).sqrt())
}

fn classify(quartic: f64) -> Bifurcation {
    if quartic > 0.0 {
        Bifurcation::Supercritical
    } else {
        Bifurcation::OutOfModel
    }
}
