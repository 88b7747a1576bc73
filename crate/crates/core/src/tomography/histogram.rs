//! Binned estimate of the quadrature density, kept for diagnostics and export.

use crate::error::{Error, Result};
use alloc::vec::Vec;
use num_traits::Float;

/// Minimum number of samples accepted by [`estimate_quadrature_pdf`].
pub const MIN_HISTOGRAM_SAMPLES: usize = 1000;

/// How the histogram bin width is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinRule {
    /// h = 2·IQR·N^{−1/3}.
    FreedmanDiaconis,
    /// Fixed bin width.
    Width(f64),
    /// Fixed number of bins over the sample range.
    Count(usize),
}

/// Normalized histogram w(X) with `density.len() + 1` edges.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePdf {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub sample_count: usize,
}

impl QuadraturePdf {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// ∫w dX over the bins.
    pub fn integral(&self) -> f64 {
        let h = self.bin_width();
        self.density.iter().map(|d| d * h).sum()
    }

    /// ∫|w − q| dX with `bin_integral(a, b)` giving ∫_a^b |w_bin − q|.
    pub fn l1_distance_with<F: Fn(f64, f64, f64) -> f64>(&self, bin_integral: F) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.density)
            .map(|(e, &d)| bin_integral(e[0], e[1], d))
            .sum()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

/// Histogram estimate of the quadrature density, normalized to unit integral.
///
/// Constant samples produce a single unit-width bin centred on the value.
pub fn estimate_quadrature_pdf(samples: &[f64], rule: BinRule) -> Result<QuadraturePdf> {
    if samples.len() < MIN_HISTOGRAM_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: MIN_HISTOGRAM_SAMPLES,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidDataset(
            "quadrature samples must be finite".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let n = samples.len();
    let span = hi - lo;

    let width = match rule {
        BinRule::FreedmanDiaconis => {
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            let h = 2.0 * iqr / (n as f64).cbrt();
            if h > 0.0 {
                h
            } else if span > 0.0 {
                // heavily tied data: fall back to Sturges' bin count
                span / ((n as f64).log2().ceil() + 1.0)
            } else {
                1.0
            }
        }
        BinRule::Width(h) => {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::invalid("bin_width", "must be finite and > 0"));
            }
            h
        }
        BinRule::Count(k) => {
            if k == 0 {
                return Err(Error::invalid("bin_count", "must be >= 1"));
            }
            if span > 0.0 {
                span / k as f64
            } else {
                1.0
            }
        }
    };

    let bins = if span > 0.0 {
        ((span / width).ceil() as usize).max(1)
    } else {
        1
    };
    let start = if span > 0.0 {
        // centre the bin range on the data
        lo - 0.5 * (bins as f64 * width - span)
    } else {
        lo - 0.5 * width
    };
    let edges: Vec<f64> = (0..=bins).map(|i| start + i as f64 * width).collect();
    let mut counts = alloc::vec![0usize; bins];
    for &x in &sorted {
        let idx = (((x - start) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let scale = 1.0 / (n as f64 * width);
    let density = counts.iter().map(|&c| c as f64 * scale).collect();
    Ok(QuadraturePdf {
        edges,
        density,
        sample_count: n,
    })
}
