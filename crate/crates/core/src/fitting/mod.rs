//! Recovery of reduced device parameters from reconstructed radial densities
//! across a sweep of operating points.
//!
//! Each sweep point carries a control value — the relative power excess
//! ΔP_L/P_LC or the detuning factor s_D — and a reconstructed density whose
//! radii are in (possibly miscalibrated) units of λ. The model at a point is
//! the analytic steady state with g0 set by the control value:
//!
//! * power axis: g0 = −(ΔP_L/P_LC − offset);
//! * detuning axis: g0 = 1 − S(s_D)/S(s_c), S(s) = sin(sβ₊)/(1 − cos(sβ₊) + β₊²)²,
//!   the slope of the intracavity intensity, with s_c (the offset) the
//!   critical detuning.
//!
//! A calibration factor c maps model radii to data radii (r_data = c·r);
//! this is equivalent to the model with (g2/c², th·c²).
//!
//! The fit minimizes Σ ∫|P_data − P_model|·2πr dr by a coarse grid search
//! followed by bound-constrained Nelder–Mead in log coordinates (linear for
//! the offset).

mod simplex;

use crate::error::{Error, Result};
use crate::flow::ReducedCoeffs;
use crate::par::map_indexed;
use crate::steady_state::{RadialDistribution, SteadyState};
use alloc::vec::Vec;
use num_traits::Float;
use simplex::{minimize, SimplexOptions};

/// Seed values per free parameter in the coarse grid search.
pub const SEEDS_PER_PARAMETER: usize = 8;

/// Which control variable a sweep scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlAxis {
    /// Relative power excess ΔP_L/P_LC.
    PowerExcess,
    /// Detuning factor s_D; β₊ sets the shape of the intensity slope.
    Detuning { beta_plus: f64 },
}

impl ControlAxis {
    /// g0 = Γ₀/γ₀ at a control value for the given offset.
    ///
    /// On the detuning axis the offset is the critical detuning on the rising
    /// flank of S, i.e. in (0, s_peak]; beyond the peak the same threshold
    /// would be reached a second time and the parametrization is not unique.
    pub fn linear_coefficient(&self, control: f64, offset: f64) -> Result<f64> {
        match *self {
            ControlAxis::PowerExcess => Ok(-(control - offset)),
            ControlAxis::Detuning { beta_plus } => {
                if !(offset > 0.0 && offset <= self.peak_detuning()) {
                    return Err(Error::OutOfModel(
                        "critical detuning must lie on the rising flank of the intensity slope",
                    ));
                }
                let slope = |s: f64| {
                    let phase = s * beta_plus;
                    let d = 1.0 - phase.cos() + beta_plus * beta_plus;
                    phase.sin() / (d * d)
                };
                Ok(1.0 - slope(control) / slope(offset))
            }
        }
    }

    /// Detuning of maximal optical drive (maximum of S); +∞ on the power axis.
    ///
    /// dS/dφ = 0 gives cos²φ + (1 + β₊²)cosφ − 2 = 0.
    pub fn peak_detuning(&self) -> f64 {
        match *self {
            ControlAxis::PowerExcess => f64::INFINITY,
            ControlAxis::Detuning { beta_plus } => {
                let b = 1.0 + beta_plus * beta_plus;
                let c = 0.5 * ((b * b + 8.0).sqrt() - b);
                c.acos() / beta_plus
            }
        }
    }
}

/// One operating point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub control: f64,
    pub reconstruction: RadialDistribution,
    pub sample_count: Option<usize>,
}

/// Operating points ordered by control value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    axis: ControlAxis,
    points: Vec<SweepPoint>,
}

impl SweepDataset {
    /// Sorts the points by control value and validates them: at least two
    /// points, distinct finite controls, and not all densities identical.
    pub fn new(axis: ControlAxis, mut points: Vec<SweepPoint>) -> Result<Self> {
        if let ControlAxis::Detuning { beta_plus } = axis {
            if !(beta_plus > 0.0) || !beta_plus.is_finite() {
                return Err(Error::invalid("beta_plus", "must be finite and > 0"));
            }
        }
        if points.len() < 2 {
            return Err(Error::InvalidDataset(
                "a sweep needs at least two points".into(),
            ));
        }
        if points.iter().any(|p| !p.control.is_finite()) {
            return Err(Error::InvalidDataset(
                "control values must be finite".into(),
            ));
        }
        points.sort_by(|a, b| a.control.total_cmp(&b.control));
        if points.windows(2).any(|w| w[0].control == w[1].control) {
            return Err(Error::InvalidDataset(
                "control values must be strictly monotone (duplicate value)".into(),
            ));
        }
        if points
            .windows(2)
            .all(|w| w[0].reconstruction == w[1].reconstruction)
        {
            return Err(Error::InvalidDataset(
                "degenerate sweep: all reconstructions are identical".into(),
            ));
        }
        Ok(Self { axis, points })
    }

    pub fn axis(&self) -> ControlAxis {
        self.axis
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn controls(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.control).collect()
    }
}

/// Reduced model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    /// Θ/(γ₀λ²).
    pub th: f64,
    /// Γ₂λ²/γ₀.
    pub g2: f64,
    /// Data radius per model radius.
    pub scale: f64,
    /// Threshold control value: power-excess offset or critical s_D.
    pub offset: f64,
}

impl FitParams {
    pub fn new(th: f64, g2: f64) -> Self {
        Self {
            th,
            g2,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn get(&self, p: FitParameter) -> f64 {
        match p {
            FitParameter::Th => self.th,
            FitParameter::G2 => self.g2,
            FitParameter::Scale => self.scale,
            FitParameter::Offset => self.offset,
        }
    }

    pub fn set(&mut self, p: FitParameter, v: f64) {
        match p {
            FitParameter::Th => self.th = v,
            FitParameter::G2 => self.g2 = v,
            FitParameter::Scale => self.scale = v,
            FitParameter::Offset => self.offset = v,
        }
    }

    /// Reduced coefficients at a control value (calibration folded in).
    pub fn coefficients(&self, axis: ControlAxis, control: f64) -> Result<ReducedCoeffs> {
        if !(self.g2 > 0.0) || !(self.th > 0.0) {
            return Err(Error::OutOfModel("fit parameters need g2 > 0 and th > 0"));
        }
        if !(self.scale > 0.0) {
            return Err(Error::invalid("scale", "must be > 0"));
        }
        let g0 = axis.linear_coefficient(control, self.offset)?;
        let c2 = self.scale * self.scale;
        Ok(ReducedCoeffs::new(g0, self.g2 / c2, self.th * c2))
    }
}

/// A fit parameter that may be free or held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FitParameter {
    Th,
    G2,
    Scale,
    Offset,
}

impl FitParameter {
    pub const ALL: [FitParameter; 4] = [
        FitParameter::Th,
        FitParameter::G2,
        FitParameter::Scale,
        FitParameter::Offset,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FitParameter::Th => "th",
            FitParameter::G2 => "g2",
            FitParameter::Scale => "scale",
            FitParameter::Offset => "offset",
        }
    }

    /// Positive parameters are searched in log space.
    fn logarithmic(&self) -> bool {
        !matches!(self, FitParameter::Offset)
    }
}

/// Fit settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub initial: FitParams,
    pub lower: FitParams,
    pub upper: FitParams,
    pub free: Vec<FitParameter>,
    pub max_iterations: usize,
    /// Simplex diameter (relative, in search coordinates) at which to stop.
    pub tolerance: f64,
    pub seeds_per_parameter: usize,
}

impl FitConfig {
    /// Fits th and g2 within a factor `span` of the initial guess; scale
    /// and offset held at the initial values.
    pub fn around(initial: FitParams, span: f64) -> Self {
        let mut lower = initial;
        let mut upper = initial;
        lower.th /= span;
        upper.th *= span;
        lower.g2 /= span;
        upper.g2 *= span;
        Self {
            initial,
            lower,
            upper,
            free: alloc::vec![FitParameter::Th, FitParameter::G2],
            max_iterations: 500,
            tolerance: 1e-4,
            seeds_per_parameter: SEEDS_PER_PARAMETER,
        }
    }

    fn validate(&self) -> Result<Vec<FitParameter>> {
        let mut free = self.free.clone();
        free.sort();
        free.dedup();
        if free.is_empty() {
            return Err(Error::invalid(
                "free",
                "at least one parameter must be free",
            ));
        }
        for &p in &free {
            let (lo, hi, x0) = (self.lower.get(p), self.upper.get(p), self.initial.get(p));
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(
                    p.name(),
                    "bounds must be finite with lower < upper",
                ));
            }
            if p.logarithmic() && !(lo > 0.0) {
                return Err(Error::invalid(p.name(), "lower bound must be > 0"));
            }
            if !(lo <= x0 && x0 <= hi) {
                return Err(Error::invalid(
                    p.name(),
                    "initial value must lie within the bounds",
                ));
            }
        }
        for p in [FitParameter::Th, FitParameter::G2, FitParameter::Scale] {
            if !(self.initial.get(p) > 0.0) {
                return Err(Error::invalid(p.name(), "must be > 0"));
            }
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) || self.seeds_per_parameter == 0 {
            return Err(Error::invalid(
                "fit",
                "max_iterations, tolerance and seeds_per_parameter must be > 0",
            ));
        }
        Ok(free)
    }
}

/// Per-point contribution to the objective at the estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResidual {
    pub control: f64,
    /// ∫|P_data − P_model|·2πr dr.
    pub l1: f64,
    /// g0 at this point.
    pub g0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimates: FitParams,
    pub free: Vec<FitParameter>,
    pub objective: f64,
    pub initial_objective: f64,
    pub residuals: Vec<PointResidual>,
    pub iterations: usize,
    pub simplex_size: f64,
    pub converged: bool,
    /// Free parameters that ended on (within 10⁻⁶ relative of) a bound.
    pub boundary_pinned: Vec<FitParameter>,
}

/// Analytic density at one control value on the given radii.
pub fn model_distribution_for_point(
    params: &FitParams,
    control: f64,
    axis: ControlAxis,
    radii: &[f64],
) -> Result<RadialDistribution> {
    let ss = SteadyState::from_reduced(&params.coefficients(axis, control)?)?;
    ss.distribution(radii)
}

fn point_l1(params: &FitParams, axis: ControlAxis, point: &SweepPoint) -> Result<f64> {
    let ss = SteadyState::from_reduced(&params.coefficients(axis, point.control)?)?;
    Ok(point.reconstruction.l1_distance_to(|r| ss.density(r)))
}

/// Σ over points of the L1 mass distance between data and model.
pub fn objective(params: &FitParams, dataset: &SweepDataset) -> Result<f64> {
    let mut total = 0.0;
    for p in &dataset.points {
        total += point_l1(params, dataset.axis, p)?;
    }
    Ok(total)
}

/// Search coordinate ↔ parameter value maps.
struct Coordinates<'a> {
    free: &'a [FitParameter],
    cfg: &'a FitConfig,
}

impl Coordinates<'_> {
    fn value_to_coordinate(&self, p: FitParameter, v: f64) -> f64 {
        if p.logarithmic() {
            v.ln()
        } else {
            // offsets are normalized by their bound width
            (v - self.cfg.lower.offset) / (self.cfg.upper.offset - self.cfg.lower.offset)
        }
    }

    fn coordinate_to_value(&self, p: FitParameter, u: f64) -> f64 {
        if p.logarithmic() {
            u.exp()
        } else {
            self.cfg.lower.offset + u * (self.cfg.upper.offset - self.cfg.lower.offset)
        }
    }

    fn params(&self, u: &[f64]) -> FitParams {
        let mut q = self.cfg.initial;
        for (&p, &x) in self.free.iter().zip(u) {
            // exp/ln round trips can leave the value a few ulps outside the box
            let v = self
                .coordinate_to_value(p, x)
                .max(self.cfg.lower.get(p))
                .min(self.cfg.upper.get(p));
            q.set(p, v);
        }
        q
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.free
            .iter()
            .map(|&p| {
                (
                    self.value_to_coordinate(p, self.cfg.lower.get(p)),
                    self.value_to_coordinate(p, self.cfg.upper.get(p)),
                )
            })
            .unzip()
    }
}

fn check_identifiability(
    free: &[FitParameter],
    dataset: &SweepDataset,
    guess: &FitParams,
) -> Result<()> {
    let has = |p| free.contains(&p);
    if !has(FitParameter::Scale) {
        return Ok(());
    }
    if has(FitParameter::Th) && has(FitParameter::G2) {
        // (g2, th, c) and (g2·k², th/k², c·k) give identical densities
        return Err(Error::Unidentifiable(
            "scale, th and g2 cannot all be free: radius rescaling maps (g2, th) onto itself",
        ));
    }
    if has(FitParameter::Th) {
        let mut below = false;
        let mut above = false;
        for p in dataset.points() {
            let g0 = dataset.axis.linear_coefficient(p.control, guess.offset)?;
            below |= g0 > 0.0;
            above |= g0 < 0.0;
        }
        if !(below && above) {
            return Err(Error::Unidentifiable(
                "scale and th need control values on both sides of threshold",
            ));
        }
    }
    Ok(())
}

/// Fits the free parameters of `cfg` to the sweep.
pub fn fit(dataset: &SweepDataset, cfg: &FitConfig) -> Result<FitResult> {
    let free = cfg.validate()?;
    check_identifiability(&free, dataset, &cfg.initial)?;
    let coords = Coordinates { free: &free, cfg };
    let (lower, upper) = coords.bounds();
    let dims = free.len();
    let eval = |u: &[f64]| objective(&coords.params(u), dataset).unwrap_or(f64::INFINITY);

    let initial_u: Vec<f64> = free
        .iter()
        .map(|&p| coords.value_to_coordinate(p, cfg.initial.get(p)))
        .collect();
    let initial_objective = objective(&cfg.initial, dataset)?;

    // coarse grid over the box, evaluated in parallel
    let k = cfg.seeds_per_parameter;
    let axis_value = |d: usize, i: usize| {
        if k == 1 {
            0.5 * (lower[d] + upper[d])
        } else {
            lower[d] + (upper[d] - lower[d]) * i as f64 / (k - 1) as f64
        }
    };
    let candidates = k.pow(dims as u32);
    let seed_values = map_indexed(candidates, |c| {
        let mut rest = c;
        let u: Vec<f64> = (0..dims)
            .map(|d| {
                let i = rest % k;
                rest /= k;
                axis_value(d, i)
            })
            .collect();
        (eval(&u), u)
    });
    let mut start = initial_u.clone();
    let mut start_value = initial_objective;
    for (v, u) in seed_values {
        if v < start_value {
            start_value = v;
            start = u;
        }
    }

    let spacing = |d: usize| (upper[d] - lower[d]) / (k.max(2) - 1) as f64;
    let steps: Vec<f64> = (0..dims).map(|d| 0.25 * spacing(d)).collect();
    let outcome = minimize(
        eval,
        &start,
        &SimplexOptions {
            lower: &lower,
            upper: &upper,
            initial_step: &steps,
            max_iterations: cfg.max_iterations,
            tolerance: cfg.tolerance,
        },
    );
    // the initial guess is kept verbatim if nothing beats it
    let estimates = if outcome.value < initial_objective {
        coords.params(&outcome.point)
    } else if start_value < initial_objective {
        coords.params(&start)
    } else {
        cfg.initial
    };
    let objective_value = objective(&estimates, dataset)?;
    let residuals = dataset
        .points
        .iter()
        .map(|p| {
            Ok(PointResidual {
                control: p.control,
                l1: point_l1(&estimates, dataset.axis, p)?,
                g0: dataset
                    .axis
                    .linear_coefficient(p.control, estimates.offset)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary_pinned = free
        .iter()
        .enumerate()
        .filter(|&(d, &p)| {
            let u = coords.value_to_coordinate(p, estimates.get(p));
            let tol = 1e-6 * (upper[d] - lower[d]).max(1.0);
            (u - lower[d]).abs() <= tol || (upper[d] - u).abs() <= tol
        })
        .map(|(_, &p)| p)
        .collect();
    Ok(FitResult {
        estimates,
        free,
        objective: objective_value,
        initial_objective,
        residuals,
        iterations: outcome.iterations,
        simplex_size: outcome.diameter,
        converged: outcome.converged,
        boundary_pinned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::linspace;

    fn model_dataset(truth: &FitParams, axis: ControlAxis, controls: &[f64]) -> SweepDataset {
        let points = controls
            .iter()
            .map(|&c| {
                let ss = SteadyState::from_reduced(&truth.coefficients(axis, c).unwrap()).unwrap();
                let radii = linspace(0.0, 1.3 * ss.default_radius_max(), 512);
                SweepPoint {
                    control: c,
                    reconstruction: ss.distribution(&radii).unwrap(),
                    sample_count: None,
                }
            })
            .collect();
        SweepDataset::new(axis, points).unwrap()
    }

    fn truth() -> FitParams {
        FitParams::new(4.8e-10, 8e4)
    }

    const CONTROLS: [f64; 5] = [-0.025, -0.01, 0.0, 0.02, 0.05];

    #[test]
    fn threshold_point_is_critical() {
        let c = truth().coefficients(ControlAxis::PowerExcess, 0.0).unwrap();
        assert_eq!(c.g0, 0.0);
        assert_eq!(c.nu(), Some(0.0));
    }

    #[test]
    fn nominal_operating_point_ring_radius() {
        let p = truth();
        let ss =
            SteadyState::from_reduced(&p.coefficients(ControlAxis::PowerExcess, 0.15).unwrap())
                .unwrap();
        let r0 = (0.15 / p.g2).sqrt();
        let radii = linspace(0.0, 2.0 * r0, 4001);
        let d = model_distribution_for_point(&p, 0.15, ControlAxis::PowerExcess, &radii).unwrap();
        assert!((d.argmax_radius() - r0).abs() <= d.cell_width());
        assert!((ss.limit_cycle_radius().unwrap() - r0).abs() < 1e-15);
    }

    #[test]
    fn zero_detuning_is_below_threshold() {
        let axis = ControlAxis::Detuning { beta_plus: 0.68 };
        let mut p = truth();
        p.offset = 0.6;
        assert_eq!(p.coefficients(axis, 0.0).unwrap().g0, 1.0);
        // g0 falls through zero at the critical detuning
        assert!(p.coefficients(axis, 0.6).unwrap().g0.abs() < 1e-15);
        assert!(p.coefficients(axis, 0.7).unwrap().g0 < 0.0);
        // the peak of the slope has zero derivative
        let peak = axis.peak_detuning();
        let g = |s: f64| p.coefficients(axis, s).unwrap().g0;
        assert!(g(peak) < g(peak - 1e-3) && g(peak) < g(peak + 1e-3));
        p.offset = peak + 0.1;
        assert!(p.coefficients(axis, 0.5).is_err());
    }

    #[test]
    fn out_of_model_rejected() {
        let mut p = truth();
        p.g2 = 0.0;
        assert!(matches!(
            model_distribution_for_point(&p, 0.0, ControlAxis::PowerExcess, &[0.0, 1e-3]),
            Err(Error::OutOfModel(_))
        ));
    }

    #[test]
    fn objective_zero_on_model_data() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        assert!(objective(&truth(), &ds).unwrap() < 1e-6);
    }

    #[test]
    fn objective_monotone_in_ring_mismatch() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &[0.05, 0.06]);
        let single = SweepDataset::new(
            ControlAxis::PowerExcess,
            alloc::vec![ds.points()[0].clone(), ds.points()[0].clone()],
        );
        assert!(single.is_err(), "identical points must be rejected");
        let values: Vec<f64> = [1.0, 1.03, 1.1, 1.3]
            .iter()
            .map(|&s| {
                let mut p = truth();
                p.scale = s;
                point_l1(&p, ControlAxis::PowerExcess, &ds.points()[0]).unwrap()
            })
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    }

    #[test]
    fn objective_ignores_point_order() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        let mut reversed = ds.points().to_vec();
        reversed.reverse();
        let ds2 = SweepDataset::new(ControlAxis::PowerExcess, reversed).unwrap();
        let mut p = truth();
        p.th *= 1.3;
        assert_eq!(objective(&p, &ds).unwrap(), objective(&p, &ds2).unwrap());
    }

    #[test]
    fn dataset_validation() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        let one = alloc::vec![ds.points()[0].clone()];
        assert!(SweepDataset::new(ControlAxis::PowerExcess, one).is_err());
        let mut dup = ds.points()[..2].to_vec();
        dup[1].control = dup[0].control;
        assert!(SweepDataset::new(ControlAxis::PowerExcess, dup).is_err());
    }

    #[test]
    fn recovers_parameters_from_model_data() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        let mut guess = truth();
        guess.th *= 2.5;
        guess.g2 /= 2.0;
        let mut cfg = FitConfig::around(guess, 10.0);
        cfg.tolerance = 1e-7;
        let res = fit(&ds, &cfg).unwrap();
        assert!(res.converged);
        assert!(
            (res.estimates.th / truth().th - 1.0).abs() < 1e-3,
            "{res:?}"
        );
        assert!(
            (res.estimates.g2 / truth().g2 - 1.0).abs() < 1e-3,
            "{res:?}"
        );
        assert!(res.objective <= res.initial_objective);
        assert!((res.objective - objective(&res.estimates, &ds).unwrap()).abs() < 1e-10);
        assert_eq!(res.residuals.len(), 5);
        assert!(res.boundary_pinned.is_empty());
    }

    #[test]
    fn truth_as_initial_guess_converges_quickly() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        let res = fit(&ds, &FitConfig::around(truth(), 2.0)).unwrap();
        assert!(res.converged && res.iterations <= 50, "{res:?}");
        assert!(res.objective <= res.initial_objective);
    }

    #[test]
    fn bounds_excluding_truth_pin_the_estimate() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        let mut cfg = FitConfig::around(truth(), 10.0);
        cfg.initial.th = 2.0 * truth().th;
        cfg.lower.th = 1.5 * truth().th;
        cfg.upper.th = 5.0 * truth().th;
        let res = fit(&ds, &cfg).unwrap();
        assert_eq!(res.boundary_pinned, alloc::vec![FitParameter::Th]);
        assert!((res.estimates.th / cfg.lower.th - 1.0).abs() < 1e-6);
    }

    #[test]
    fn detuning_axis_recovers_critical_detuning() {
        let axis = ControlAxis::Detuning { beta_plus: 0.68 };
        let mut t = FitParams::new(2e-10, 5e5);
        t.offset = 0.6;
        let ds = model_dataset(&t, axis, &[0.0, 0.4, 0.55, 0.7, 1.0, 1.2986]);
        let mut guess = t;
        guess.offset = 0.5;
        guess.th *= 1.5;
        let mut cfg = FitConfig::around(guess, 4.0);
        cfg.free.push(FitParameter::Offset);
        cfg.lower.offset = 0.3;
        cfg.upper.offset = 0.75;
        let res = fit(&ds, &cfg).unwrap();
        assert!((res.estimates.offset - 0.6).abs() < 1e-3, "{res:?}");
        assert!((res.estimates.th / t.th - 1.0).abs() < 1e-2, "{res:?}");
    }

    #[test]
    fn scale_with_both_shape_parameters_is_unidentifiable() {
        let ds = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        let mut cfg = FitConfig::around(truth(), 2.0);
        cfg.free.push(FitParameter::Scale);
        cfg.lower.scale = 0.5;
        cfg.upper.scale = 2.0;
        assert!(matches!(fit(&ds, &cfg), Err(Error::Unidentifiable(_))));
    }

    #[test]
    fn scale_and_th_need_both_sides_of_threshold() {
        let one_side = model_dataset(&truth(), ControlAxis::PowerExcess, &[-0.03, -0.02, -0.01]);
        let mut cfg = FitConfig::around(truth(), 2.0);
        cfg.free = alloc::vec![FitParameter::Th, FitParameter::Scale];
        cfg.lower.scale = 0.5;
        cfg.upper.scale = 2.0;
        assert!(matches!(
            fit(&one_side, &cfg),
            Err(Error::Unidentifiable(_))
        ));

        let both = model_dataset(&truth(), ControlAxis::PowerExcess, &CONTROLS);
        cfg.initial.scale = 1.2;
        let res = fit(&both, &cfg).unwrap();
        assert!((res.estimates.scale - 1.0).abs() < 1e-3, "{res:?}");
        assert!(
            (res.estimates.th / truth().th - 1.0).abs() < 1e-2,
            "{res:?}"
        );
    }
}
