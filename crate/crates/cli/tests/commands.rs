use optohopf::commands::peak_radius;
use optohopf::config::resolve;
use optohopf::format::Table;
use optohopf::{replay, run, Command, Config};
use optohopf_core::SteadyState;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Output;

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn sweep_config(name: &str) -> PathBuf {
    workspace_root().join("configs").join(name)
}

fn config_with(overrides: &[&str]) -> Config {
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    resolve(None, &overrides).unwrap()
}

/// Power sweep at 144 kHz with a short, cheap ensemble.
fn small_simulation(extra: &[&str]) -> Config {
    let mut all = vec![
        "model.g2=8e4",
        "simulate.control=0.15",
        "simulate.n_steps=40000",
        "simulate.n_trajectories=8",
        "simulate.burn_in_steps=5000",
        "simulate.initial=\"limit_cycle\"",
    ];
    all.extend_from_slice(extra);
    config_with(&all)
}

fn key_values(path: &Path) -> HashMap<String, String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn value(kv: &HashMap<String, String>, key: &str) -> f64 {
    kv[key].parse().unwrap()
}

fn binary(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_optohopf"));
    cmd.args(args);
    for var in [
        "OPTOHOPF_CONFIG",
        "OPTOHOPF_SEED",
        "OPTOHOPF_OUT",
        "OPTOHOPF_THREADS",
    ] {
        cmd.env_remove(var);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn theory_power_sweep_peaks_on_the_limit_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = resolve(
        Some(&sweep_config("power_sweep_sample_a.toml")),
        &["theory.raster_points=0".into()],
    )
    .unwrap();
    run(Command::Theory, &cfg, dir.path(), 0).unwrap();
    let summary = Table::read(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.rows.len(), 61);
    for row in &summary.rows {
        let (g0, nu, peak, lc, mass) = (row[1], row[2], row[3], row[4], row[6]);
        assert!((mass - 1.0).abs() < 1e-3, "grid mass {mass}");
        if g0 > 0.0 {
            assert_eq!(peak, 0.0, "origin-peaked below threshold");
        } else if nu < -3.0 {
            assert!((peak / lc - 1.0).abs() < 1e-3, "peak {peak} vs r0 {lc}");
        }
    }
    // one density file per control
    assert!(dir.path().join("density_060.csv").exists());
    assert!(!dir.path().join("raster_000.csv").exists());
}

#[test]
fn theory_detuning_sweep_crosses_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = resolve(
        Some(&sweep_config("detuning_sweep_sample_b.toml")),
        &["theory.raster_points=0".into()],
    )
    .unwrap();
    run(Command::Theory, &cfg, dir.path(), 0).unwrap();
    let summary = Table::read(&dir.path().join("summary.csv")).unwrap();
    let first = &summary.rows[0];
    assert!(
        first[1] > 0.0 && first[3] == 0.0,
        "small detuning is below threshold"
    );
    let ring = summary.rows.iter().filter(|r| r[3] > 0.0).count();
    assert!(ring > 10, "{ring} ring-shaped panels");
}

#[test]
fn simulation_is_seeded_and_thread_independent() {
    let cfg = small_simulation(&[]);
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let a = run(Command::Simulate, &cfg, dirs[0].path(), 1).unwrap();
    let b = run(Command::Simulate, &cfg, dirs[1].path(), 4).unwrap();
    assert_eq!(a.outputs, b.outputs);
    let mut other = cfg.clone();
    other.run.seed += 1;
    let c = run(Command::Simulate, &other, dirs[2].path(), 4).unwrap();
    assert_ne!(
        a.output_digest("samples.csv"),
        c.output_digest("samples.csv")
    );
    assert_eq!(a.seeds, vec![cfg.run.seed]);
}

#[test]
fn simulated_mean_radius_matches_the_model() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Simulate, &small_simulation(&[]), dir.path(), 0).unwrap();
    let kv = key_values(&dir.path().join("summary.txt"));
    let rel = value(&kv, "mean_radius") / value(&kv, "model_mean_radius") - 1.0;
    assert!(rel.abs() < 0.02, "mean radius off by {rel}");
    let samples = Table::read(&dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.names(), ["sample_index", "X"]);
    assert_eq!(samples.columns[1].unit, "lambda");
}

#[test]
fn tomography_of_simulated_samples_recovers_the_density() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_simulation(&["simulate.n_trajectories=32", "simulate.n_steps=100000"]);
    run(Command::Simulate, &cfg, &dir.path().join("sim"), 0).unwrap();
    let mut tomo = cfg.clone();
    tomo.tomo.input = Some(dir.path().join("sim/samples.csv"));
    run(Command::Tomo, &tomo, &dir.path().join("tomo"), 0).unwrap();

    let rec = Table::read(&dir.path().join("tomo/reconstruction.csv")).unwrap();
    let (r, p) = (rec.column(0), rec.column(2));
    let state = SteadyState::from_reduced(&cfg.coefficients(0.15).unwrap()).unwrap();
    let r0 = state.limit_cycle_radius().unwrap();
    let peak = peak_radius(&r, &p);
    assert!((peak / r0 - 1.0).abs() < 0.03, "peak {peak} vs r0 {r0}");
    let dist = optohopf_core::RadialDistribution::new(r, p).unwrap();
    let l1 = dist.l1_distance_to(|x| state.density(x));
    assert!(l1 < 0.25, "L1 {l1}");
}

#[test]
fn detector_record_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_simulation(&[
        "simulate.trajectory_steps=60000",
        "simulate.detector=true",
        "tomo.phase=\"spread\"",
    ]);
    run(Command::Simulate, &cfg, &dir.path().join("sim"), 0).unwrap();
    let sim = key_values(&dir.path().join("sim/summary.txt"));
    let mut tomo = cfg.clone();
    tomo.tomo.input = Some(dir.path().join("sim/detector.csv"));
    run(Command::Tomo, &tomo, &dir.path().join("tomo"), 0).unwrap();
    let diag = key_values(&dir.path().join("tomo/diagnostics.txt"));
    assert_eq!(diag["demodulation_reliable"], "true");
    let rel = value(&diag, "demodulated_mean_radius") / value(&sim, "trajectory_mean_radius") - 1.0;
    assert!(rel.abs() < 0.05, "demodulated |A| off by {rel}");
    let r0 = value(&sim, "limit_cycle_radius");
    let peak = value(&diag, "peak_radius");
    assert!((peak / r0 - 1.0).abs() < 0.05, "peak {peak} vs r0 {r0}");
    assert!(dir.path().join("tomo/demodulated.csv").exists());
}

#[test]
fn detector_requires_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_simulation(&["simulate.detector=true"]);
    let err = run(Command::Simulate, &cfg, dir.path(), 0).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("simulate.trajectory_steps"));
}

fn write_sweep(dir: &Path, controls: &[Option<f64>], truth: &Config) {
    let mut spec = String::from("axis = \"power\"\n");
    for (i, c) in controls.iter().enumerate() {
        let file = format!("p{i}.csv");
        spec.push_str(&format!("[[point]]\nfile = \"{file}\"\n"));
        if let Some(c) = c {
            spec.push_str(&format!("control = {c}\n"));
            let state = SteadyState::from_reduced(&truth.coefficients(*c).unwrap()).unwrap();
            let radii = optohopf_core::quadrature::linspace(0.0, 4e-3, 400);
            let density: Vec<f64> = radii.iter().map(|&r| state.density(r)).collect();
            Table::from_columns(
                vec![
                    optohopf::format::Column::new("r", "lambda"),
                    optohopf::format::Column::new("P", "lambda^-2"),
                ],
                &[&radii, &density],
            )
            .write(&dir.join(file))
            .unwrap();
        }
    }
    std::fs::write(dir.join("sweep.toml"), spec).unwrap();
}

#[test]
fn fit_recovers_parameters_of_a_noise_free_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let truth = config_with(&["model.th=4.8e-10", "model.g2=8e4"]);
    let sweep = dir.path().join("sweep");
    std::fs::create_dir(&sweep).unwrap();
    write_sweep(
        &sweep,
        &[Some(-0.02), Some(-0.005), Some(0.0), Some(0.02), Some(0.05)],
        &truth,
    );

    let mut cfg = config_with(&["fit.th=7e-10", "fit.g2=5e4"]);
    cfg.fit.sweep = Some(sweep.clone());
    run(Command::Fit, &cfg, &dir.path().join("fit"), 0).unwrap();
    let kv = key_values(&dir.path().join("fit/fit_result.txt"));
    assert!(
        (value(&kv, "th") / 4.8e-10 - 1.0).abs() < 0.02,
        "th {}",
        kv["th"]
    );
    assert!(
        (value(&kv, "g2") / 8e4 - 1.0).abs() < 0.02,
        "g2 {}",
        kv["g2"]
    );
    let report = std::fs::read_to_string(dir.path().join("fit/fit_report.txt")).unwrap();
    assert!(report.contains("Per-point residuals"));
    let residuals = Table::read(&dir.path().join("fit/residuals.csv")).unwrap();
    assert_eq!(residuals.rows.len(), 5);
    assert!(
        residuals.rows.iter().all(|r| r[2] < 0.02),
        "{:?}",
        residuals.rows
    );
}

#[test]
fn fit_rejects_a_point_without_control() {
    let dir = tempfile::tempdir().unwrap();
    let truth = config_with(&[]);
    write_sweep(dir.path(), &[Some(0.02), None], &truth);
    let mut cfg = truth.clone();
    cfg.fit.sweep = Some(dir.path().to_path_buf());
    let err = run(Command::Fit, &cfg, &dir.path().join("out"), 0).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let msg = err.to_string();
    assert!(msg.contains("point 1") && msg.contains("p1.csv"), "{msg}");
}

#[test]
fn replay_reproduces_digests_and_checks_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_simulation(&["simulate.n_steps=20000"]);
    run(Command::Simulate, &cfg, &dir.path().join("sim"), 2).unwrap();
    let mut tomo = cfg.clone();
    let input = dir.path().join("sim/samples.csv");
    tomo.tomo.input = Some(input.clone());
    run(Command::Tomo, &tomo, &dir.path().join("tomo"), 2).unwrap();

    for (name, threads) in [("sim", 3), ("tomo", 1)] {
        let report = replay(
            &dir.path().join(name).join("manifest.json"),
            &dir.path().join(format!("{name}_replay")),
            threads,
        )
        .unwrap();
        assert!(
            report.mismatches.is_empty(),
            "{name}: {:?}",
            report.mismatches
        );
    }

    std::fs::write(&input, "# sample_index,X\n# units: 1,lambda\n0,1\n").unwrap();
    let err = replay(
        &dir.path().join("tomo/manifest.json"),
        &dir.path().join("again"),
        1,
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "# sample_index,X\n# units: 1,lambda\n0,0.1\n1,abc\n").unwrap();
    let out = dir.path().join("out");
    let o = binary(
        &[
            "--input",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "tomo",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    std::fs::write(&bad, "# sample_index,X\n0,0.1\n").unwrap();
    let o = binary(
        &[
            "--input",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "tomo",
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "missing units line: {}",
        stderr(&o)
    );
}

type Case<'a> = (Vec<&'a str>, Vec<(&'a str, &'a str)>, &'a str);

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cases: Vec<Case> = vec![
        (
            vec![
                "--out",
                out,
                "--set",
                "simulate.n_trajectories=0",
                "simulate",
            ],
            vec![],
            "n_trajectories",
        ),
        (
            vec!["--out", out, "simulate"],
            vec![("OPTOHOPF_SET_SIMULATE__N_TRAJECTORIES", "0")],
            "n_trajectories",
        ),
        (
            vec!["--out", out, "--set", "tomo.colour=1", "theory"],
            vec![],
            "colour",
        ),
        (
            vec!["--out", out, "--input", "x.csv", "theory"],
            vec![],
            "--input",
        ),
        (vec!["--out", out, "tomo"], vec![], "tomo.input"),
        (vec!["--bogus-flag", "theory"], vec![], "bogus"),
    ];
    for (args, envs, needle) in cases {
        let o = binary(&args, &envs);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn binary_runs_with_flags_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = binary(
        &["--set", "axis.controls=[-0.05, 0.05]", "theory"],
        &[
            ("OPTOHOPF_OUT", out.to_str().unwrap()),
            ("OPTOHOPF_THREADS", "2"),
            ("OPTOHOPF_SET_THEORY__RADIAL_POINTS", "300"),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let density = Table::read(&out.join("density_001.csv")).unwrap();
    assert_eq!(density.rows.len(), 300);
    let resolved = std::fs::read_to_string(out.join("resolved_config.toml")).unwrap();
    let reparsed = resolve(Some(&out.join("resolved_config.toml")), &[]).unwrap();
    assert_eq!(reparsed.theory.radial_points, 300, "{resolved}");
    let manifest = optohopf::RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.threads, 2);

    let o = binary(
        &[
            "--out",
            out.to_str().unwrap(),
            "replay",
            out.join("manifest.json").to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
}
