//! Inverse Hankel transform of the characteristic function.
//!
//! For a phase-independent state and X = s·Re(A e^{−iφ}), the planar Fourier
//! transform of P is w̃(k/s), so
//!
//! ```text
//! P(r) = (s²/2π) ∫₀^∞ w̃(ζ) ζ J₀(s ζ r) dζ.
//! ```

use super::characteristic::CharacteristicFunction;
use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::special::bessel_j0;
use crate::steady_state::RadialDistribution;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

/// Minimum ζ-grid density, in points per oscillation of J₀(s·ζ·r_max).
pub const MIN_POINTS_PER_OSCILLATION: f64 = 4.0;

/// Non-fatal conditions noticed during reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TomographyWarning {
    /// |w̃| has not fallen below its noise floor by the end of the ζ grid and
    /// no explicit window was given; the reconstruction carries truncation ripple.
    NotDecayed { zeta_max: f64, last_value: f64 },
    /// The ζ grid resolves J₀(s·ζ·r_max) with fewer points than recommended.
    SparseZetaGrid { points_per_oscillation: f64 },
    /// The imaginary part of w̃ exceeds the noise floor: the data are not
    /// symmetric about X = 0.
    Asymmetric { max_imag_residual: f64 },
}

/// Raw reconstruction plus its clipped, unit-mass variant.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelReconstruction {
    /// Direct inversion; may contain negative values.
    pub raw: RadialDistribution,
    /// Negative values set to zero and rescaled to unit mass.
    pub clipped: RadialDistribution,
    /// Applied window width ζ_w, if any.
    pub window: Option<f64>,
    pub warnings: Vec<TomographyWarning>,
}

/// ζ run over which |w̃| must stay below its noise floor to count as decayed:
/// two oscillations of J₀(s·ζ·r_max).
pub fn decay_run(scale: f64, r_max: f64) -> f64 {
    4.0 * PI / (scale * r_max)
}

fn trapezoid_weights(zeta: &[f64]) -> Vec<f64> {
    let n = zeta.len();
    (0..n)
        .map(|k| {
            let lo = if k > 0 { zeta[k - 1] } else { zeta[k] };
            let hi = if k + 1 < n { zeta[k + 1] } else { zeta[k] };
            0.5 * (hi - lo)
        })
        .collect()
}

/// Reconstructs P(r) on `radii` by trapezoidal quadrature over the ζ grid
/// (with endpoint corrections at ζ = 0), with the characteristic
/// function's apodization window applied.
pub fn hankel_reconstruct(
    cf: &CharacteristicFunction,
    radii: &[f64],
) -> Result<HankelReconstruction> {
    if radii.len() < 2 {
        return Err(Error::InvalidGrid("need at least two radii"));
    }
    let r_max = radii[radii.len() - 1];
    if !(r_max > 0.0) {
        return Err(Error::InvalidGrid("radial grid must extend past 0"));
    }
    let s = cf.scale;
    let run = decay_run(s, r_max);
    let mut warnings = Vec::new();

    let max_step = cf.zeta.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let ppo = 2.0 * PI / (s * r_max * max_step);
    if ppo < MIN_POINTS_PER_OSCILLATION {
        warnings.push(TomographyWarning::SparseZetaGrid {
            points_per_oscillation: ppo,
        });
    }
    let floor = cf.noise_floor();
    let max_imag = cf.imag_residual.iter().cloned().fold(0.0, f64::max);
    if cf.sample_count.is_some() && max_imag > floor {
        warnings.push(TomographyWarning::Asymmetric {
            max_imag_residual: max_imag,
        });
    }

    let window = cf.window_width(run);
    if window.is_none() && !cf.is_decayed(run) {
        warnings.push(TomographyWarning::NotDecayed {
            zeta_max: cf.zeta[cf.zeta.len() - 1],
            last_value: cf.values[cf.values.len() - 1],
        });
    }

    let weights = trapezoid_weights(&cf.zeta);
    let prefactor = s * s / (2.0 * PI);
    let integrand: Vec<f64> = cf
        .zeta
        .iter()
        .zip(&cf.values)
        .zip(&weights)
        .map(|((&z, &v), &w)| {
            let apod = window.map_or(1.0, |zw| (-(z / zw) * (z / zw)).exp());
            prefactor * w * v * z * apod
        })
        .collect();
    // The integrand f(ζ) = ζ·G(ζ), G even, is odd in ζ, so the trapezoid sum
    // carries endpoint errors at ζ = 0 (Euler–Maclaurin):
    //   ∫f = T + h²f′(0)/12 − h⁴f‴(0)/720,  f′(0) = G(0),  f‴(0) = 3G″(0),
    // with G″(0)/G(0) = w̃″(0)/w̃(0) − 2/ζ_w² − (s r)²/2. w̃″(0) comes from a
    // second difference of the even characteristic function.
    let h0 = cf.zeta[1] - cf.zeta[0];
    let g0 = prefactor * cf.values[0];
    let curvature =
        2.0 * (cf.values[1] - cf.values[0]) / (h0 * h0) - window.map_or(0.0, |zw| 2.0 / (zw * zw));
    let density = map_indexed(radii.len(), |j| {
        let kr = s * radii[j];
        let g2 = g0 * (curvature - 0.5 * kr * kr);
        let endpoint = g0 * h0 * h0 / 12.0 - g2 * h0.powi(4) / 240.0;
        endpoint
            + cf.zeta
                .iter()
                .zip(&integrand)
                .map(|(&z, &c)| c * bessel_j0(kr * z))
                .sum::<f64>()
    });
    let raw = RadialDistribution::new(radii.to_vec(), density)?;
    let clipped = raw.clipped_renormalized()?;
    Ok(HankelReconstruction {
        raw,
        clipped,
        window,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::super::characteristic::{
        characteristic_from_density, zeta_grid, Apodization, HOMODYNE_SCALE,
    };
    use super::*;
    use crate::flow::ReducedCoeffs;
    use crate::quadrature::linspace;
    use crate::steady_state::SteadyState;
    use core::f64::consts::SQRT_2;

    fn gaussian_cf(sigma: f64, zeta: Vec<f64>) -> CharacteristicFunction {
        // per-axis variance σ² ⇒ Var X = 2σ² ⇒ w̃ = exp(−σ²ζ²)
        let values = zeta.iter().map(|z| (-(sigma * z).powi(2)).exp()).collect();
        CharacteristicFunction::from_values(zeta, values, HOMODYNE_SCALE).unwrap()
    }

    #[test]
    fn gaussian_hankel_pair() {
        let sigma = 0.7;
        let radii = linspace(0.0, 6.0 * sigma, 400);
        let zeta = zeta_grid(8.0 / sigma, radii[399], HOMODYNE_SCALE, 16.0);
        let rec = hankel_reconstruct(&gaussian_cf(sigma, zeta), &radii).unwrap();
        let truth = |r: f64| (-r * r / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma);
        let l1 = rec.raw.l1_distance_to(truth);
        assert!(l1 < 1e-6, "L1 = {l1}");
        assert!(rec.warnings.is_empty(), "{:?}", rec.warnings);
        assert!(rec.window.is_none());
    }

    #[test]
    fn truncated_spectrum_is_flagged() {
        let radii = linspace(0.0, 4.0, 100);
        let zeta = zeta_grid(1.0, 4.0, HOMODYNE_SCALE, 8.0);
        let rec = hankel_reconstruct(&gaussian_cf(0.7, zeta), &radii).unwrap();
        assert!(rec
            .warnings
            .iter()
            .any(|w| matches!(w, TomographyWarning::NotDecayed { .. })));
    }

    #[test]
    fn sparse_grid_is_flagged() {
        let radii = linspace(0.0, 4.0, 100);
        let zeta = zeta_grid(12.0, 4.0, HOMODYNE_SCALE, 2.0);
        let rec = hankel_reconstruct(&gaussian_cf(0.7, zeta), &radii).unwrap();
        assert!(rec
            .warnings
            .iter()
            .any(|w| matches!(w, TomographyWarning::SparseZetaGrid { .. })));
    }

    #[test]
    fn apodization_blurs_like_gaussian_convolution() {
        // window exp(−ζ²/ζ_w²) adds per-axis variance 1/ζ_w²
        let sigma = 0.7;
        let zw = 2.0;
        let radii = linspace(0.0, 5.0, 300);
        let zeta = zeta_grid(10.0, 5.0, HOMODYNE_SCALE, 16.0);
        let cf = gaussian_cf(sigma, zeta).with_apodization(Apodization::Fixed(zw));
        let rec = hankel_reconstruct(&cf, &radii).unwrap();
        assert_eq!(rec.window, Some(zw));
        let var = sigma * sigma + 1.0 / (zw * zw);
        let l1 = rec
            .raw
            .l1_distance_to(|r| (-r * r / (2.0 * var)).exp() / (2.0 * PI * var));
        assert!(l1 < 1e-6, "L1 = {l1}");
    }

    fn ring_reconstruction(zeta_w: Option<f64>) -> (f64, f64, f64) {
        // narrow ring: cf from the tabulated marginal of the steady state
        let ss = SteadyState::from_reduced(&ReducedCoeffs::with_nu(-12.0, 1e-3)).unwrap();
        let r_max = ss.default_radius_max();
        let radii = linspace(0.0, r_max, 801);
        let x_max = SQRT_2 * ss.cutoff_radius();
        let xs = linspace(-x_max, x_max, 6001);
        let w: Vec<f64> = xs
            .iter()
            .map(|&x| ss.marginal_quadrature_density(x))
            .collect();
        let zeta = zeta_grid(12.0 / ss.ring_width().unwrap(), r_max, HOMODYNE_SCALE, 8.0);
        let mut cf = characteristic_from_density(&xs, &w, &zeta).unwrap();
        if let Some(zw) = zeta_w {
            cf = cf.with_apodization(Apodization::Fixed(zw));
        }
        let rec = hankel_reconstruct(&cf, &radii).unwrap();
        (
            rec.raw.argmax_radius(),
            ss.limit_cycle_radius().unwrap(),
            rec.raw.cell_width(),
        )
    }

    #[test]
    fn ring_peak_location() {
        let (peak, r0, cell) = ring_reconstruction(None);
        assert!((peak - r0).abs() <= cell, "peak {peak} vs r0 {r0}");
    }

    #[test]
    fn window_width_doubling_keeps_peak() {
        let ss = SteadyState::from_reduced(&ReducedCoeffs::with_nu(-12.0, 1e-3)).unwrap();
        let zw = 2.0 / ss.ring_width().unwrap();
        let (p1, _, cell) = ring_reconstruction(Some(zw));
        let (p2, _, _) = ring_reconstruction(Some(2.0 * zw));
        assert!((p1 - p2).abs() < 0.5 * cell + 1e-15, "{p1} vs {p2}");
    }
}
