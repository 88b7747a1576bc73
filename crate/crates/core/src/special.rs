//! Special functions used by the steady-state density and the Hankel inversion.

use core::f64::consts::PI;
use num_traits::Float;

/// Natural log of the scaled complementary error function, ln(e^{x²} erfc x).
///
/// Stable for all finite x: the direct form is used below 10 and the
/// asymptotic series above, where erfc would lose all precision.
pub fn ln_erfcx(x: f64) -> f64 {
    if x < 10.0 {
        x * x + libm::erfc(x).ln()
    } else {
        // erfcx(x) = 1/(x√π) Σ (-1)^n (2n-1)!! / (2x²)^n, truncated at n = 12.
        let inv = 1.0 / (2.0 * x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..=12 {
            term *= -((2 * n - 1) as f64) * inv;
            sum += term;
        }
        (sum / (x * PI.sqrt())).ln()
    }
}

/// Scaled complementary error function e^{x²} erfc x.
pub fn erfcx(x: f64) -> f64 {
    ln_erfcx(x).exp()
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}
