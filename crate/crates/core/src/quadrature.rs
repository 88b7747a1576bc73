//! Numerical integration: adaptive Gauss–Kronrod for integrands given as
//! closures, and composite rules for sampled grids.

use alloc::vec::Vec;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// 15-point Kronrod rule on [a, b] with the embedded 7-point Gauss error estimate.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `breaks` are optional interior points (peaks, kinks) that seed the initial
/// partition. Subdivision stops once the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)` or after `max_intervals` intervals.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Integral {
    const MAX_INTERVALS: usize = 4000;
    let mut points: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    points.push(a);
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // (a, b, value, error)
    let mut parts: Vec<(f64, f64, f64, f64)> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = kronrod15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target || parts.len() >= MAX_INTERVALS {
            return Integral {
                value: total,
                error_estimate: err,
                intervals: parts.len(),
            };
        }
        let (idx, _) =
            parts.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc },
            );
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // interval exhausted at double precision
            let (v, _) = kronrod15(&f, lo, hi);
            parts.push((lo, hi, v, 0.0));
            continue;
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        end
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Composite trapezoidal rule for samples `ys` at abscissae `xs`.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Composite Simpson rule on a uniform grid with spacing `h`.
///
/// An odd number of intervals is closed with Simpson's 3/8 rule on the last
/// three intervals. Falls back to the trapezoid rule below four points.
pub fn simpson_uniform(h: f64, ys: &[f64]) -> f64 {
    let n = ys.len();
    if n < 2 {
        return 0.0;
    }
    if n < 4 {
        return h * (ys.iter().sum::<f64>() - 0.5 * (ys[0] + ys[n - 1]));
    }
    let intervals = n - 1;
    let (simpson_end, tail) = if intervals % 2 == 0 {
        (n - 1, 0.0)
    } else {
        let k = n - 4;
        (
            k,
            3.0 * h / 8.0 * (ys[k] + 3.0 * ys[k + 1] + 3.0 * ys[k + 2] + ys[k + 3]),
        )
    };
    let mut acc = ys[0] + ys[simpson_end];
    for (i, y) in ys.iter().enumerate().take(simpson_end).skip(1) {
        acc += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
    }
    acc * h / 3.0 + tail
}

/// Integral of a radially symmetric density over the plane, ∫ p(r)·2πr dr,
/// on a uniform radial grid.
pub fn planar_mass(radii: &[f64], density: &[f64]) -> f64 {
    if radii.len() < 2 {
        return 0.0;
    }
    let h = radii[1] - radii[0];
    let ys: Vec<f64> = radii
        .iter()
        .zip(density)
        .map(|(r, p)| 2.0 * core::f64::consts::PI * r * p)
        .collect();
    if is_uniform(radii) {
        simpson_uniform(h, &ys)
    } else {
        trapezoid(radii, &ys)
    }
}

pub(crate) fn is_uniform(xs: &[f64]) -> bool {
    if xs.len() < 3 {
        return true;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    xs.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
}
