//! Static optics of the fiber cavity: intracavity intensity factor I(x_D),
//! its derivatives, reflection probability and the detuning factor.

use crate::error::{Error, Result};
use core::f64::consts::PI;
use num_traits::Float;

/// Mirror/loss parameters of the optical cavity.
///
/// The loss coefficients are stored squared, which is the form in which they
/// enter I(x_D), so the transmission constructor round-trips exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityOptics {
    beta_plus_sq: f64,
    beta_minus_sq: f64,
    finesse: f64,
    wavelength: f64,
}

impl CavityOptics {
    /// Builds the optics from β₊, β₋ (dimensionless), the finesse β_F and the
    /// optical wavelength in metres.
    pub fn new(beta_plus: f64, beta_minus: f64, finesse: f64, wavelength: f64) -> Result<Self> {
        if !(beta_plus > 0.0) || !beta_plus.is_finite() {
            return Err(Error::invalid("beta_plus", "must be finite and > 0"));
        }
        if !(beta_minus >= 0.0) || !beta_minus.is_finite() {
            return Err(Error::invalid("beta_minus", "must be finite and >= 0"));
        }
        Self::from_squares(
            beta_plus * beta_plus,
            beta_minus * beta_minus,
            finesse,
            wavelength,
        )
    }

    /// Builds the optics from the escape probabilities through the static
    /// reflector (`t_b`), by absorption (`t_a`) and by radiation (`t_r`):
    /// β±² = (T_B ± T_A ± T_R)²/8.
    pub fn from_transmissions(
        t_b: f64,
        t_a: f64,
        t_r: f64,
        finesse: f64,
        wavelength: f64,
    ) -> Result<Self> {
        for (name, t) in [("t_b", t_b), ("t_a", t_a), ("t_r", t_r)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(name, "transmission must lie in [0, 1]"));
            }
        }
        let sum = t_b + t_a + t_r;
        let diff = t_b - t_a - t_r;
        Self::from_squares(sum * sum / 8.0, diff * diff / 8.0, finesse, wavelength)
    }

    /// Uses the free-spectral-range relation β_F = ω_FSR / (ω_C β₊) for the finesse.
    pub fn with_free_spectral_range(
        beta_plus: f64,
        beta_minus: f64,
        omega_fsr: f64,
        omega_cavity: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(omega_fsr > 0.0 && omega_cavity > 0.0) {
            return Err(Error::invalid("omega_fsr", "frequencies must be > 0"));
        }
        Self::new(
            beta_plus,
            beta_minus,
            omega_fsr / (omega_cavity * beta_plus),
            wavelength,
        )
    }

    fn from_squares(bp2: f64, bm2: f64, finesse: f64, wavelength: f64) -> Result<Self> {
        if !(bp2 > 0.0) {
            return Err(Error::invalid("beta_plus", "must be > 0"));
        }
        if bm2 > bp2 {
            return Err(Error::invalid(
                "beta_minus",
                "requires beta_plus² >= beta_minus²",
            ));
        }
        if !(finesse > 0.0) || !finesse.is_finite() {
            return Err(Error::invalid("finesse", "must be finite and > 0"));
        }
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::invalid("wavelength", "must be finite and > 0"));
        }
        Ok(Self {
            beta_plus_sq: bp2,
            beta_minus_sq: bm2,
            finesse,
            wavelength,
        })
    }

    pub fn beta_plus(&self) -> f64 {
        self.beta_plus_sq.sqrt()
    }
    pub fn beta_minus(&self) -> f64 {
        self.beta_minus_sq.sqrt()
    }
    pub fn beta_plus_sq(&self) -> f64 {
        self.beta_plus_sq
    }
    pub fn beta_minus_sq(&self) -> f64 {
        self.beta_minus_sq
    }
    pub fn finesse(&self) -> f64 {
        self.finesse
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    fn wavenumber(&self) -> f64 {
        4.0 * PI / self.wavelength
    }

    // β_F (β₊² − β₋²), the numerator of I(x_D).
    fn numerator(&self) -> f64 {
        self.finesse * (1.0 - self.beta_minus_sq / self.beta_plus_sq) * self.beta_plus_sq
    }

    /// Intracavity intensity factor I(x_D) for a mirror offset `x_d` (m) from
    /// the intensity maximum. Periodic with period λ/2.
    pub fn intracavity_intensity(&self, x_d: f64) -> f64 {
        let denom = 1.0 - (self.wavenumber() * x_d).cos() + self.beta_plus_sq;
        self.numerator() / denom
    }

    /// Steady-state reflection probability R_C = 1 − I/β_F.
    pub fn reflection_probability(&self, x_d: f64) -> f64 {
        1.0 - self.intracavity_intensity(x_d) / self.finesse
    }

    /// Value, first and second derivative of I with respect to displacement.
    pub fn intensity_derivatives(&self, x_d: f64) -> IntensityExpansion {
        let k = self.wavenumber();
        let (s, c) = (k * x_d).sin_cos();
        let n = self.numerator();
        let d = 1.0 - c + self.beta_plus_sq;
        let d1 = k * s;
        let d2 = k * k * c;
        IntensityExpansion {
            value: n / d,
            slope: -n * d1 / (d * d),
            curvature: n * (2.0 * d1 * d1 / (d * d * d) - d2 / (d * d)),
        }
    }

    /// Detuning factor s_D = 4π x_D / (λ β₊); positive for red detuning.
    pub fn detuning_factor(&self, x_d: f64) -> f64 {
        self.wavenumber() * x_d / self.beta_plus()
    }

    /// Inverse of [`detuning_factor`](Self::detuning_factor).
    pub fn offset_for_detuning(&self, s_d: f64) -> f64 {
        s_d * self.beta_plus() / self.wavenumber()
    }
}

/// Second-order expansion of I about an operating offset: I₀, I₀′ (1/m), I₀″ (1/m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityExpansion {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Maps a laser wavelength to an effective mirror offset for swept-wavelength
/// measurements: x_D = L_opt (λ − λ_R) / λ_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthDetuning {
    pub resonance_wavelength: f64,
    pub optical_length: f64,
}

impl WavelengthDetuning {
    pub fn new(resonance_wavelength: f64, optical_length: f64) -> Result<Self> {
        if !(resonance_wavelength > 0.0) {
            return Err(Error::invalid("resonance_wavelength", "must be > 0"));
        }
        if !(optical_length > 0.0) {
            return Err(Error::invalid("optical_length", "must be > 0"));
        }
        Ok(Self {
            resonance_wavelength,
            optical_length,
        })
    }

    pub fn offset(&self, wavelength: f64) -> f64 {
        self.optical_length * (wavelength - self.resonance_wavelength) / self.resonance_wavelength
    }

    /// Effective optical length that maps `wavelength` onto detuning factor
    /// `s_d` for the given optics.
    pub fn calibrate(
        optics: &CavityOptics,
        resonance_wavelength: f64,
        wavelength: f64,
        s_d: f64,
    ) -> Result<Self> {
        let dl = wavelength - resonance_wavelength;
        if dl == 0.0 {
            return Err(Error::invalid(
                "wavelength",
                "must differ from the resonance",
            ));
        }
        let length = optics.offset_for_detuning(s_d) * resonance_wavelength / dl;
        Self::new(resonance_wavelength, length)
    }
}
