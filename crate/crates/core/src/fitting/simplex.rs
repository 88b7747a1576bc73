//! Bound-constrained Nelder–Mead simplex minimization.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimplexOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Largest vertex distance from the best vertex at termination.
    pub diameter: f64,
    pub converged: bool,
}

pub(crate) struct SimplexOptions<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub initial_step: &'a [f64],
    pub max_iterations: usize,
    pub tolerance: f64,
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].max(lo[i]).min(hi[i]);
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t·(b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    simplex[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(&simplex[0])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Minimizes `f` from `start`, clamping every trial point into the box.
/// Non-finite objective values are treated as +∞.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    opts: &SimplexOptions,
) -> SimplexOutcome {
    let n = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0, opts.lower, opts.upper);
    simplex.push(x0.clone());
    for i in 0..n {
        let mut v = x0.clone();
        // step away from the nearer bound so the vertex stays distinct
        let step = opts.initial_step[i];
        v[i] = if v[i] + step <= opts.upper[i] {
            v[i] + step
        } else {
            v[i] - step
        };
        clamp(&mut v, opts.lower, opts.upper);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iterations = 0;
    loop {
        // order vertices by value (stable, so ties keep their order)
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let d = diameter(&simplex);
        if d < opts.tolerance || iterations >= opts.max_iterations {
            return SimplexOutcome {
                point: simplex[0].clone(),
                value: values[0],
                iterations,
                diameter: d,
                converged: d < opts.tolerance,
            };
        }
        iterations += 1;

        let mut centroid = alloc::vec![0.0; n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }
        let worst = &simplex[n];
        let mut reflected = affine(&centroid, worst, -1.0);
        clamp(&mut reflected, opts.lower, opts.upper);
        let fr = eval(&reflected);

        if fr < values[0] {
            let mut expanded = affine(&centroid, worst, -2.0);
            clamp(&mut expanded, opts.lower, opts.upper);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (target, ft) = if fr < values[n] {
            (reflected.clone(), fr)
        } else {
            (worst.clone(), values[n])
        };
        let mut contracted = affine(&centroid, &target, 0.5);
        clamp(&mut contracted, opts.lower, opts.upper);
        let fc = eval(&contracted);
        if fc < ft {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for k in 1..=n {
            simplex[k] = affine(&simplex[0], &simplex[k], 0.5);
            values[k] = eval(&simplex[k]);
        }
    }
}
