//! Effective sample size of correlated records.
//!
//! Samples taken from one trajectory (or a demodulated detector record) are
//! correlated over the amplitude relaxation time, so the statistical noise
//! of the empirical characteristic function is set by N/(2τ) rather than N.

use alloc::vec::Vec;

/// Sokal window constant: sum the autocorrelation up to lag M ≥ C·τ(M).
const WINDOW_CONSTANT: f64 = 5.0;

/// Integrated autocorrelation time τ = ½ + Σ_{k≥1} ρ(k) in samples, summed
/// with Sokal's self-consistent window and at most N/4 lags.
///
/// Independent samples give τ ≈ ½. Returns ½ for fewer than 8 samples or a
/// constant series.
pub fn integrated_autocorrelation_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 8 {
        return 0.5;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(c0 > 0.0) {
        return 0.5;
    }
    let mut tau = 0.5;
    for lag in 1..=n / 4 {
        let c: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        tau += c / c0;
        if lag as f64 >= WINDOW_CONSTANT * tau {
            break;
        }
    }
    tau.max(0.5)
}

/// N/(2τ), clamped to [1, N].
pub fn effective_sample_count(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    (n / (2.0 * integrated_autocorrelation_time(series))).clamp(1.0_f64.min(n), n)
}
