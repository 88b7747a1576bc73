//! Langevin ensemble at one operating point, with optional detector signal.

use super::{RunRecord, DENSITY_UNIT, LENGTH_UNIT};
use crate::config::{Config, InitialState, IntegratorKind};
use crate::error::{CliError, InSection, Result};
use crate::format::{number, write_key_values, Column, Table};
use crate::manifest::Outputs;
use optohopf_core::langevin::{
    ensemble_steady_samples, quadratures, simulate_trajectory, DetectorModel, Integrator,
    RadialHistogram, SimConfig,
};
use optohopf_core::{Complex64, SteadyState};

pub const SAMPLES_FILE: &str = "samples.csv";
pub const AMPLITUDES_FILE: &str = "amplitudes.csv";
pub const HISTOGRAM_FILE: &str = "radial_histogram.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DETECTOR_FILE: &str = "detector.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

const HISTOGRAM_BINS: usize = 200;

pub(crate) fn run(config: &Config, out: &mut Outputs) -> Result<RunRecord> {
    let s = &config.simulate;
    let rc = config.coefficients(s.control)?;
    let initial = match s.initial {
        InitialState::Origin => Complex64::new(0.0, 0.0),
        InitialState::LimitCycle => Complex64::new(
            rc.limit_cycle_radius().ok_or_else(|| {
                CliError::config("invalid key `simulate.initial`: no limit cycle below threshold")
            })?,
            0.0,
        ),
    };
    let sim = SimConfig {
        dt: s.dt,
        n_steps: s.n_steps,
        n_trajectories: s.n_trajectories,
        burn_in_steps: s.burn_in_steps,
        seed: config.run.seed,
        rotating_frame: true,
        record_stride: s.record_stride,
        integrator: match s.integrator {
            IntegratorKind::EulerMaruyama => Integrator::EulerMaruyama,
            IntegratorKind::Heun => Integrator::Heun,
        },
        initial,
    };
    let pooled = ensemble_steady_samples(&rc, &sim).in_section("simulate")?;
    let n = pooled.samples.len();
    if n == 0 {
        return Err(CliError::config(
            "invalid key `simulate.n_steps`: no samples recorded after burn-in",
        ));
    }
    let index: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let xs = quadratures(&pooled.samples, s.phi);
    Table::from_columns(
        vec![
            Column::new("sample_index", "1"),
            Column::new("X", LENGTH_UNIT),
        ],
        &[&index, &xs],
    )
    .write(&out.file(SAMPLES_FILE))?;
    let re: Vec<f64> = pooled.samples.iter().map(|a| a.re).collect();
    let im: Vec<f64> = pooled.samples.iter().map(|a| a.im).collect();
    Table::from_columns(
        vec![
            Column::new("sample_index", "1"),
            Column::new("re", LENGTH_UNIT),
            Column::new("im", LENGTH_UNIT),
        ],
        &[&index, &re, &im],
    )
    .write(&out.file(AMPLITUDES_FILE))?;

    // pooled radial histogram against the analytic density (when it exists)
    let steady = SteadyState::from_reduced(&rc).ok();
    let r_max = match &steady {
        Some(st) => st.default_radius_max(),
        None => pooled.samples.iter().map(|a| a.norm()).fold(0.0, f64::max),
    };
    let hist = RadialHistogram::new(&pooled.samples, r_max, HISTOGRAM_BINS);
    let centers: Vec<f64> = hist.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
    let model: Vec<f64> = centers
        .iter()
        .map(|&r| steady.as_ref().map_or(0.0, |st| st.density(r)))
        .collect();
    Table::from_columns(
        vec![
            Column::new("r", LENGTH_UNIT),
            Column::new("P_sampled", DENSITY_UNIT),
            Column::new("P_model", DENSITY_UNIT),
        ],
        &[&centers, &hist.area_density(), &model],
    )
    .write(&out.file(HISTOGRAM_FILE))?;

    let radii: Vec<f64> = pooled.samples.iter().map(|a| a.norm()).collect();
    let mean_r = radii.iter().sum::<f64>() / n as f64;
    let mean_r2 = radii.iter().map(|r| r * r).sum::<f64>() / n as f64;
    let mut summary = vec![
        ("control".to_string(), number(s.control)),
        ("g0".into(), number(rc.g0)),
        ("g2".into(), number(rc.g2)),
        ("th".into(), number(rc.th)),
        ("samples".into(), n.to_string()),
        ("record_stride".into(), pooled.stride.to_string()),
        ("short_burn_in".into(), pooled.short_burn_in.to_string()),
        ("mean_radius".into(), number(mean_r)),
        ("mean_square_radius".into(), number(mean_r2)),
        ("modal_radius".into(), number(hist.modal_radius())),
        ("histogram_bin_width".into(), number(hist.bin_width())),
        (
            "limit_cycle_radius".into(),
            rc.limit_cycle_radius().map_or("none".into(), number),
        ),
    ];
    if let Some(st) = &steady {
        summary.push(("model_mean_radius".into(), number(st.radial_moment(1))));
        summary.push((
            "model_mean_square_radius".into(),
            number(st.mean_square_radius()),
        ));
        summary.push((
            "histogram_l1".into(),
            number(hist.l1_distance(|a, b| {
                optohopf_core::quadrature::integrate(
                    |r| st.density(r) * 2.0 * std::f64::consts::PI * r,
                    a,
                    b,
                    &[],
                    1e-10,
                    1e-14,
                )
                .value
            })),
        ));
    }

    if s.trajectory_steps > 0 || s.detector {
        if s.trajectory_steps == 0 {
            return Err(CliError::config(
                "invalid key `simulate.trajectory_steps`: must be > 0 when simulate.detector = true",
            ));
        }
        let path_cfg = SimConfig {
            n_steps: s.trajectory_steps,
            n_trajectories: 1,
            burn_in_steps: 0,
            record_stride: Some(1),
            ..sim.clone()
        };
        let traj = simulate_trajectory(&rc, &path_cfg, 0).in_section("simulate")?;
        let t: Vec<f64> = traj.times().collect();
        let re: Vec<f64> = traj.samples.iter().map(|a| a.re).collect();
        let im: Vec<f64> = traj.samples.iter().map(|a| a.im).collect();
        Table::from_columns(
            vec![
                Column::new("time", "gamma0^-1"),
                Column::new("re", LENGTH_UNIT),
                Column::new("im", LENGTH_UNIT),
            ],
            &[&t, &re, &im],
        )
        .write(&out.file(TRAJECTORY_FILE))?;
        let traj_mean =
            traj.samples.iter().map(|a| a.norm()).sum::<f64>() / traj.samples.len() as f64;
        summary.push(("trajectory_mean_radius".into(), number(traj_mean)));

        if s.detector {
            let (optics, op) = config.optics.cavity(&config.device)?;
            let model = DetectorModel {
                optics,
                operating_point: op,
                gamma0: config.device.gamma0()?,
                carrier: config.device.omega0(),
                oversample: s.detector_oversample,
            };
            let signal = model.synthesize(&traj).in_section("simulate")?;
            let times: Vec<f64> = signal.times().collect();
            Table::from_columns(
                vec![Column::new("time_s", "s"), Column::new("value", "W")],
                &[&times, &signal.power],
            )
            .write(&out.file(DETECTOR_FILE))?;
            summary.push(("detector_dt_s".into(), number(signal.dt)));
        }
    }
    write_key_values(&out.file(SUMMARY_FILE), &summary)?;
    Ok(RunRecord {
        inputs: Vec::new(),
        seeds: vec![config.run.seed],
    })
}
