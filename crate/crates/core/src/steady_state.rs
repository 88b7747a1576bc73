//! Analytic steady-state phase-space density of the amplitude equation.
//!
//! The stationary solution of the Fokker–Planck equation for the radial
//! Langevin dynamics is the Boltzmann form
//!
//! ```text
//! P(A_r) = exp(−H(A_r)/Θ) / N,   H = Γ₀A_r²/2 + Γ₂A_r⁴/4,
//! N = π^{3/2} √(Θ/Γ₂) · erfcx(ν),   ν = Γ₀ / √(4Γ₂Θ),
//! ```
//!
//! normalized over the plane (∫P·2πA_r dA_r = 1) and independent of phase.
//! Evaluation is done in the log domain with H − min H written as a perfect
//! square above threshold, so both deep-ring and deep-Gaussian regimes are
//! stable. Any consistent unit system works; with [`ReducedCoeffs`] the
//! amplitude is in units of λ.

use crate::error::{Error, Result};
use crate::flow::{FlowCoeffs, ReducedCoeffs};
use crate::quadrature::{integrate, linspace, planar_mass};
use crate::special::{bessel_j0, ln_erfcx};
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use num_complex::Complex64;
use num_traits::Float;
use rand_core::RngCore;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Relative agreement required between the closed-form and quadrature normalizations.
pub const NORMALIZATION_CROSS_CHECK: f64 = 1e-6;

/// Default number of radial grid points.
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Potential excess (in units of Θ) beyond which the density is treated as zero.
const TAIL_CUTOFF: f64 = 60.0;

/// H(A_r) = Γ₀A_r²/2 + Γ₂A_r⁴/4.
pub fn potential(linear: f64, quartic: f64, radius: f64) -> f64 {
    let r2 = radius * radius;
    0.5 * linear * r2 + 0.25 * quartic * r2 * r2
}

/// Normalized steady-state density for given (Γ₀, Γ₂, Θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    linear: f64,
    quartic: f64,
    noise: f64,
    nu: f64,
    ln_norm: f64,
    // ln N + min(H)/Θ, the normalization against the shifted potential
    ln_norm_shifted: f64,
    ln_norm_quadrature: f64,
}

impl SteadyState {
    /// Builds the density and cross-checks the closed-form normalization
    /// against adaptive quadrature. Rejects Γ₂ ≤ 0 (not normalizable).
    pub fn new(linear: f64, quartic: f64, noise: f64) -> Result<Self> {
        if !(quartic > 0.0) {
            return Err(Error::OutOfModel(
                "Γ₂ must be > 0 for a normalizable steady state",
            ));
        }
        if !quartic.is_finite() {
            return Err(Error::invalid("gamma2", "must be finite"));
        }
        if !(noise > 0.0) || !noise.is_finite() {
            return Err(Error::invalid(
                "theta",
                "noise strength must be finite and > 0",
            ));
        }
        if !linear.is_finite() {
            return Err(Error::invalid("gamma0", "must be finite"));
        }
        let nu = linear / (4.0 * quartic * noise).sqrt();
        let ln_norm = 1.5 * PI.ln() + 0.5 * (noise / quartic).ln() + ln_erfcx(nu);
        let min_h = if linear < 0.0 {
            -linear * linear / (4.0 * quartic)
        } else {
            0.0
        };
        let mut s = SteadyState {
            linear,
            quartic,
            noise,
            nu,
            ln_norm,
            ln_norm_shifted: ln_norm + min_h / noise,
            ln_norm_quadrature: f64::NAN,
        };
        let shifted_mass = integrate(
            |r| (-s.scaled_excess(r)).exp() * 2.0 * PI * r,
            0.0,
            s.cutoff_radius(),
            &s.breakpoints(),
            1e-12,
            0.0,
        );
        s.ln_norm_quadrature = shifted_mass.value.ln() - min_h / noise;
        let rel = (s.ln_norm_quadrature - ln_norm).exp() - 1.0;
        if !(rel.abs() <= NORMALIZATION_CROSS_CHECK) {
            return Err(Error::NormalizationMismatch {
                closed_form: ln_norm.exp(),
                quadrature: s.ln_norm_quadrature.exp(),
            });
        }
        Ok(s)
    }

    pub fn from_flow(c: &FlowCoeffs) -> Result<Self> {
        Self::new(c.gamma0, c.gamma2, c.theta)
    }

    pub fn from_reduced(c: &ReducedCoeffs) -> Result<Self> {
        Self::new(c.g0, c.g2, c.th)
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }
    pub fn quartic(&self) -> f64 {
        self.quartic
    }
    pub fn noise(&self) -> f64 {
        self.noise
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Normalization constant N from the closed form.
    pub fn normalization(&self) -> f64 {
        self.ln_norm.exp()
    }

    /// Normalization constant N from adaptive quadrature.
    pub fn normalization_quadrature(&self) -> f64 {
        self.ln_norm_quadrature.exp()
    }

    pub fn ln_normalization(&self) -> f64 {
        self.ln_norm
    }

    pub fn potential(&self, radius: f64) -> f64 {
        potential(self.linear, self.quartic, radius)
    }

    // (H(r) − min H)/Θ, exact square above threshold.
    fn scaled_excess(&self, radius: f64) -> f64 {
        let r2 = radius * radius;
        if self.linear < 0.0 {
            let d = r2 + self.linear / self.quartic;
            0.25 * self.quartic * d * d / self.noise
        } else {
            (0.5 * self.linear * r2 + 0.25 * self.quartic * r2 * r2) / self.noise
        }
    }

    pub fn ln_density(&self, radius: f64) -> f64 {
        -self.scaled_excess(radius) - self.ln_norm_shifted
    }

    /// P(A_r), per unit phase-space area.
    pub fn density(&self, radius: f64) -> f64 {
        self.ln_density(radius).exp()
    }

    /// P evaluated through δ₀² and ν directly. Undefined at Γ₀ = 0.
    pub fn density_via_shape(&self, radius: f64) -> Option<f64> {
        if self.linear == 0.0 {
            return None;
        }
        let d2 = 2.0 * self.noise / self.linear;
        let x = radius * radius / d2;
        let exponent = -x - x * x / (4.0 * self.nu * self.nu);
        let denom = PI.powf(1.5) * d2 * self.nu * ln_erfcx(self.nu).exp();
        Some(exponent.exp() / denom)
    }

    /// Noise-free ring radius √(−Γ₀/Γ₂) above threshold.
    pub fn limit_cycle_radius(&self) -> Option<f64> {
        (self.linear < 0.0).then(|| (-self.linear / self.quartic).sqrt())
    }

    /// Location of the density maximum: the ring radius above threshold, else 0.
    pub fn mode_radius(&self) -> f64 {
        self.limit_cycle_radius().unwrap_or(0.0)
    }

    /// Width scale (Θ/Γ₂)^{1/4} of the critical (Γ₀ = 0) distribution.
    pub fn critical_width(&self) -> f64 {
        (self.noise / self.quartic).sqrt().sqrt()
    }

    /// Radial width of the ring, √(Θ/(−2Γ₀)), capped at the critical width.
    pub fn ring_width(&self) -> Option<f64> {
        self.limit_cycle_radius().map(|_| {
            (self.noise / (-2.0 * self.linear))
                .sqrt()
                .min(self.critical_width())
        })
    }

    /// ⟨A_r²⟩ in closed form: 2√(Θ/Γ₂) (1/(√π erfcx ν) − ν).
    pub fn mean_square_radius(&self) -> f64 {
        let inv = (-ln_erfcx(self.nu)).exp() / PI.sqrt();
        2.0 * (self.noise / self.quartic).sqrt() * (inv - self.nu)
    }

    /// ⟨A_r^n⟩ by adaptive quadrature (relative tolerance 1e-10).
    pub fn radial_moment(&self, n: u32) -> f64 {
        if n == 0 {
            return 1.0;
        }
        integrate(
            |r| r.powi(n as i32) * self.density(r) * 2.0 * PI * r,
            0.0,
            self.cutoff_radius(),
            &self.breakpoints(),
            1e-10,
            0.0,
        )
        .value
    }

    /// Radius beyond which the density is below e^{-60} of its peak.
    pub fn cutoff_radius(&self) -> f64 {
        // Γ₂/4 v² + Γ₀/2 v − (min H + KΘ) = 0 with v = r².
        let a2 = 0.25 * self.quartic;
        let a1 = 0.5 * self.linear;
        let min_h = if self.linear < 0.0 {
            -self.linear * self.linear / (4.0 * self.quartic)
        } else {
            0.0
        };
        let c = min_h + TAIL_CUTOFF * self.noise;
        let disc = (a1 * a1 + 4.0 * a2 * c).sqrt();
        let v = if a1 >= 0.0 {
            2.0 * c / (a1 + disc)
        } else {
            (-a1 + disc) / (2.0 * a2)
        };
        v.sqrt()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = Vec::new();
        if let (Some(r0), Some(w)) = (self.limit_cycle_radius(), self.ring_width()) {
            for k in [-3.0, 0.0, 3.0] {
                let r = r0 + k * w;
                if r > 0.0 {
                    b.push(r);
                }
            }
        }
        b
    }

    /// Default radial extent: max(5·δ-scale, r₀ + 6 ring widths), where the
    /// δ-scale is |δ₀| capped at 1.5 critical widths.
    pub fn default_radius_max(&self) -> f64 {
        let critical = self.critical_width();
        let delta = if self.linear != 0.0 {
            (2.0 * self.noise / self.linear.abs())
                .sqrt()
                .min(1.5 * critical)
        } else {
            1.5 * critical
        };
        let ring = match (self.limit_cycle_radius(), self.ring_width()) {
            (Some(r0), Some(w)) => r0 + 6.0 * w,
            _ => 0.0,
        };
        (5.0 * delta).max(ring)
    }

    pub fn default_grid(&self) -> Vec<f64> {
        linspace(0.0, self.default_radius_max(), DEFAULT_GRID_POINTS)
    }

    /// Tabulates the density on `radii`.
    pub fn distribution(&self, radii: &[f64]) -> Result<RadialDistribution> {
        let density = radii.iter().map(|&r| self.density(r)).collect();
        RadialDistribution::new(radii.to_vec(), density)
    }

    /// Density w(X) of the homodyne quadrature X = √2·Re(A e^{−iφ}):
    /// w(X) = (1/√2) ∫ P(√(X²/2 + y²)) dy. Independent of φ.
    pub fn marginal_quadrature_density(&self, x: f64) -> f64 {
        let u = x.abs() / SQRT_2;
        let cutoff = self.cutoff_radius();
        if u >= cutoff {
            return 0.0;
        }
        let y_max = (cutoff * cutoff - u * u).sqrt();
        let mut breaks = Vec::new();
        for r in self.breakpoints() {
            if r > u {
                breaks.push((r * r - u * u).sqrt());
            }
        }
        let half = integrate(
            |y| self.density((u * u + y * y).sqrt()),
            0.0,
            y_max,
            &breaks,
            1e-11,
            0.0,
        );
        SQRT_2 * half.value
    }

    /// Characteristic function of the quadrature marginal via the planar
    /// Fourier transform of P: w̃(ζ) = 2π∫ P(r) J₀(√2 ζ r) r dr.
    pub fn quadrature_characteristic(&self, zeta: f64) -> f64 {
        let k = SQRT_2 * zeta;
        let cutoff = self.cutoff_radius();
        let mut breaks = self.breakpoints();
        // resolve the J₀ oscillations
        let periods = (k * cutoff / PI).ceil().min(2000.0) as usize;
        breaks.extend((1..periods).map(|i| cutoff * i as f64 / periods as f64));
        integrate(
            |r| self.density(r) * bessel_j0(k * r) * 2.0 * PI * r,
            0.0,
            cutoff,
            &breaks,
            1e-11,
            1e-14,
        )
        .value
    }

    /// Draws one complex amplitude from the steady state.
    ///
    /// u = A_r² has density ∝ exp(−au − bu²) on u ≥ 0, a normal truncated at
    /// zero; it is drawn by rejection (plain normal proposals when the
    /// truncation is mild, exponential proposals in the tail otherwise).
    /// The phase is uniform.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Complex64 {
        // u ~ N(μ, σ²) | u ≥ 0 with μ = −Γ₀/Γ₂, σ = √(2Θ/Γ₂); α = −μ/σ = √2 ν.
        let sigma = (2.0 * self.noise / self.quartic).sqrt();
        let alpha = SQRT_2 * self.nu;
        let excess = if alpha < 0.5 {
            loop {
                let z: f64 = StandardNormal.sample(rng);
                if z >= alpha {
                    break z - alpha;
                }
            }
        } else {
            let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
            loop {
                let e: f64 = Exp1.sample(rng);
                let z = alpha + e / rate;
                let accept = (-0.5 * (z - rate) * (z - rate)).exp();
                if uniform01(rng) <= accept {
                    break e / rate;
                }
            }
        };
        let radius = (sigma * excess).sqrt();
        let phase = 2.0 * PI * uniform01(rng);
        Complex64::from_polar(radius, phase)
    }
}

pub(crate) fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    // 53 random bits in [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A sampled radial density on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDistribution {
    pub radii: Vec<f64>,
    /// Density per unit phase-space area; may be negative for reconstructions.
    pub density: Vec<f64>,
    /// |∫P·2πr dr − 1| on this grid.
    pub normalization_residual: f64,
    /// ∫|min(P, 0)|·2πr dr / ∫|P|·2πr dr.
    pub negativity_index: f64,
}

impl RadialDistribution {
    pub fn new(radii: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::InvalidGrid("need at least two radii"));
        }
        if radii.len() != density.len() {
            return Err(Error::InvalidGrid("radii and density lengths differ"));
        }
        if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "radii must be non-negative and strictly ascending",
            ));
        }
        if density.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("density must be finite"));
        }
        let mass = planar_mass(&radii, &density);
        let abs: Vec<f64> = density.iter().map(|p| p.abs()).collect();
        let neg: Vec<f64> = density.iter().map(|p| (-p).max(0.0)).collect();
        let total_abs = planar_mass(&radii, &abs);
        let negativity_index = if total_abs > 0.0 {
            planar_mass(&radii, &neg) / total_abs
        } else {
            0.0
        };
        Ok(Self {
            radii,
            density,
            normalization_residual: (mass - 1.0).abs(),
            negativity_index,
        })
    }

    pub fn mass(&self) -> f64 {
        planar_mass(&self.radii, &self.density)
    }

    /// Uniform grid spacing (mean spacing for non-uniform grids).
    pub fn cell_width(&self) -> f64 {
        (self.radii[self.radii.len() - 1] - self.radii[0]) / (self.radii.len() - 1) as f64
    }

    pub fn argmax_radius(&self) -> f64 {
        let (i, _) =
            self.density
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc },
                );
        self.radii[i]
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r < self.radii[0] || r > self.radii[n - 1] || n == 0 {
            return 0.0;
        }
        let idx = self.radii.partition_point(|&x| x <= r);
        if idx == 0 {
            return self.density[0];
        }
        if idx >= n {
            return self.density[n - 1];
        }
        let (r0, r1) = (self.radii[idx - 1], self.radii[idx]);
        let t = (r - r0) / (r1 - r0);
        self.density[idx - 1] * (1.0 - t) + self.density[idx] * t
    }

    /// ∫|P − Q|·2πr dr on this grid, with `q` evaluated at each radius.
    pub fn l1_distance_to<F: Fn(f64) -> f64>(&self, q: F) -> f64 {
        let diff: Vec<f64> = self
            .radii
            .iter()
            .zip(&self.density)
            .map(|(&r, &p)| (p - q(r)).abs())
            .collect();
        planar_mass(&self.radii, &diff)
    }

    /// L1 distance to another distribution, interpolated onto this grid.
    pub fn l1_distance(&self, other: &RadialDistribution) -> f64 {
        if self.radii == other.radii {
            let diff: Vec<f64> = self
                .density
                .iter()
                .zip(&other.density)
                .map(|(p, q)| (p - q).abs())
                .collect();
            planar_mass(&self.radii, &diff)
        } else {
            self.l1_distance_to(|r| other.value_at(r))
        }
    }

    /// Negative values clipped to zero, then rescaled to unit mass.
    pub fn clipped_renormalized(&self) -> Result<Self> {
        let clipped: Vec<f64> = self.density.iter().map(|p| p.max(0.0)).collect();
        let mass = planar_mass(&self.radii, &clipped);
        if !(mass > 0.0) {
            return Err(Error::InvalidGrid("no positive mass to renormalize"));
        }
        Self::new(
            self.radii.clone(),
            clipped.iter().map(|p| p / mass).collect(),
        )
    }

    /// Rescales radii by `factor` keeping unit mass: P'(r) = P(r/f)/f².
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let f2 = factor * factor;
        Self::new(
            self.radii.iter().map(|r| r * factor).collect(),
            self.density.iter().map(|p| p / f2).collect(),
        )
    }

    /// Samples the density on an n×n Cartesian grid spanning ±r_max by radial
    /// interpolation. Returns the shared axis and row-major values (row = A_y).
    pub fn raster(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let r_max = self.radii[self.radii.len() - 1];
        let axis = linspace(-r_max, r_max, n);
        let mut values = Vec::with_capacity(n * n);
        for &y in &axis {
            for &x in &axis {
                values.push(self.value_at((x * x + y * y).sqrt()));
            }
        }
        (axis, values)
    }
}
