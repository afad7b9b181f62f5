use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::process::Command;

use compass_cli::config::{SweepAxis, SweepParameter};
use compass_cli::fit::{fit_file, FitKind, FitOptions, Table};
use compass_cli::output::Manifest;
use compass_cli::run::{run_echo, run_sweep, ECHO_CSV, SWEEP_CSV};
use compass_cli::validate::{run_validation, ValidateOptions};
use compass_cli::{CliError, RunConfig};
use compass_core::oracle::read_golden;
use compass_core::{Boundary, InitialXState, QcRecord};

fn small_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.model.sites = 40;
    c.time.t_max = 3.0;
    c.time.dt = 0.1;
    c.output.deterministic = true;
    c
}

fn column(table: &Table, name: &str) -> Vec<f64> {
    let c = table.column(name).unwrap();
    table.rows.iter().map(|r| r[c]).collect()
}

#[test]
fn unknown_keys_are_rejected_with_location() {
    let err = RunConfig::from_toml_str("[model]\nj_od = 2.0\n", "inline").unwrap_err();
    let text = err.to_string();
    assert!(matches!(err, CliError::ConfigSyntax { .. }));
    assert!(text.contains("line 2") && text.contains("j_od"), "{text}");
}

#[test]
fn invalid_values_name_the_field() {
    let err = RunConfig::from_toml_str("[model]\nsites = 7\n", "inline").unwrap_err();
    assert!(err.to_string().contains("model.sites"), "{err}");
    let err = RunConfig::from_toml_str("[model]\ntheta = 4.0\n", "inline").unwrap_err();
    assert!(err.to_string().contains("model.theta"), "{err}");
    let err = RunConfig::from_toml_str("[[sweep]]\nparameter = \"j_even\"\nvalues = []\n", "inline").unwrap_err();
    assert!(err.to_string().contains("sweep[0]"), "{err}");
    let err = RunConfig::from_toml_str("[[sweep]]\nparameter = \"sites\"\nvalues = [8, 9]\n", "inline").unwrap_err();
    assert!(err.to_string().contains("sweep[0]"), "{err}");
    let err = RunConfig::from_toml_str("[[sweep]]\nparameter = \"spin\"\nvalues = [1]\n", "inline").unwrap_err();
    assert!(matches!(err, CliError::ConfigSyntax { .. }));
}

#[test]
fn config_round_trips_through_toml() {
    let mut c = small_config();
    c.sweep.push(SweepAxis::list(SweepParameter::Theta, vec![0.5, 1.0]));
    let text = c.to_toml();
    assert!(text.starts_with("# Units"));
    assert_eq!(RunConfig::from_toml_str(&text, "round trip").unwrap(), c);
}

#[test]
fn ranges_expand_inclusively() {
    let c = RunConfig::from_toml_str(
        "[[sweep]]\nparameter = \"theta\"\nrange = { start = 0.5, stop = 1.5, count = 5 }\n",
        "inline",
    )
    .unwrap();
    assert_eq!(c.sweep[0].points(), vec![0.5, 0.75, 1.0, 1.25, 1.5]);
}

#[test]
fn zero_coupling_echo_is_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.coupling.g = 0.0;
    run_echo(&c, Some(dir.path()), false).unwrap();
    let text = fs::read_to_string(dir.path().join(ECHO_CSV)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,abs_F14"));
    for line in lines {
        assert!(line.ends_with(",1.000000000000"), "{line}");
    }
}

#[test]
fn small_open_chain_echo_matches_golden_file() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/echo_open.json");
    for record in read_golden(&golden).unwrap() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        c.model.j_odd = record.params.j_odd;
        c.model.j_even = record.params.j_even;
        c.model.theta = record.params.theta;
        c.model.field = record.params.field;
        c.model.sites = record.params.sites;
        c.model.boundary = Boundary::Open;
        c.coupling.g = record.coupling.g;
        c.time.t_min = record.t;
        c.time.t_max = record.t;
        c.time.dt = 1.0;
        run_echo(&c, Some(dir.path()), false).unwrap();
        let table = Table::read(&dir.path().join(ECHO_CSV)).unwrap();
        let value = table.rows[0][1];
        assert!((value - record.magnitude()).abs() < 1e-11, "{record:?}: {value}");
    }
}

#[test]
fn single_point_sweep_is_echo_plus_measures() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_config();
    run_echo(&c, Some(&dir.path().join("echo")), false).unwrap();
    let mut s = c.clone();
    s.sweep.push(SweepAxis::list(SweepParameter::Theta, vec![FRAC_PI_2]));
    run_sweep(&s, Some(&dir.path().join("sweep")), false).unwrap();

    let echo = Table::read(&dir.path().join("echo").join(ECHO_CSV)).unwrap();
    let sweep = Table::read(&dir.path().join("sweep").join(SWEEP_CSV)).unwrap();
    assert_eq!(sweep.header, ["theta", "t", "abs_F14", "eof", "discord", "concurrence", "negativity"]);
    assert_eq!(column(&echo, "t"), column(&sweep, "t"));
    assert_eq!(column(&echo, "abs_F14"), column(&sweep, "abs_F14"));
    // the CSV holds |F| rounded to 12 decimals, and the measures have
    // logarithmic slopes near |F| = 1
    for row in &sweep.rows {
        let r = QcRecord::from_echo(&InitialXState::bell(), row[1], row[2]).unwrap();
        assert!((r.eof - row[3]).abs() < 1e-9);
        assert!((r.discord - row[4]).abs() < 1e-9);
        assert!((r.concurrence - row[5]).abs() < 1e-9);
        assert!((r.negativity - row[6]).abs() < 1e-9);
    }
}

#[test]
fn two_axis_sweep_orders_rows_outer_inner_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.time.t_max = 0.2;
    c.sweep.push(SweepAxis::list(SweepParameter::JEven, vec![3.0, 2.0]));
    c.sweep.push(SweepAxis::list(SweepParameter::G, vec![0.1, 0.05, 0.2]));
    run_sweep(&c, Some(dir.path()), true).unwrap();
    let t = Table::read(&dir.path().join(SWEEP_CSV)).unwrap();
    assert_eq!(t.rows.len(), 2 * 3 * 3);
    let keys: Vec<(f64, f64, f64)> = t.rows.iter().map(|r| (r[0], r[1], r[2])).collect();
    let mut expected = Vec::new();
    for je in [3.0, 2.0] {
        for g in [0.1, 0.05, 0.2] {
            for ti in 0..3 {
                expected.push((je, g, ti as f64 * 0.1));
            }
        }
    }
    for (k, e) in keys.iter().zip(&expected) {
        assert_eq!(k.0, e.0);
        assert_eq!(k.1, e.1);
        assert!((k.2 - e.2).abs() < 1e-12);
    }
    assert!(dir.path().join("sweep.gp").exists());
}

#[test]
fn manifest_lists_every_output_with_matching_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.sweep.push(SweepAxis::list(SweepParameter::Field, vec![0.0, 0.3]));
    let outcome = run_sweep(&c, Some(dir.path()), true).unwrap();
    let manifest = Manifest::read(dir.path()).unwrap();
    let listed: Vec<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(listed, ["sweep.csv", "sweep.gp"]);
    assert_eq!(outcome.files, listed);
    assert!(manifest.verify(dir.path()).unwrap().is_empty());
    assert!(manifest.created.is_none());
    assert_eq!(manifest.config, serde_json::to_value(&c).unwrap());

    fs::write(dir.path().join("sweep.csv"), "tampered\n").unwrap();
    assert_eq!(manifest.verify(dir.path()).unwrap(), ["sweep.csv"]);
}

#[test]
fn timestamp_is_recorded_unless_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.output.deterministic = false;
    run_echo(&c, Some(dir.path()), false).unwrap();
    assert!(Manifest::read(dir.path()).unwrap().created.is_some());
}

#[test]
fn echo_refuses_sweep_axes_and_sweep_needs_them() {
    let mut c = small_config();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(run_sweep(&c, Some(dir.path()), false), Err(CliError::Usage(_))));
    c.sweep.push(SweepAxis::list(SweepParameter::G, vec![0.1]));
    assert!(matches!(run_echo(&c, Some(dir.path()), false), Err(CliError::Usage(_))));
    for p in [SweepParameter::Theta, SweepParameter::Field] {
        c.sweep.push(SweepAxis::list(p, vec![0.1]));
    }
    assert!(matches!(run_sweep(&c, Some(dir.path()), false), Err(CliError::Usage(_))));
}

#[test]
fn exact_power_law_points_recover_tau() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    let tau: f64 = -0.75;
    let mut text = String::from("delta,t_r\n");
    for d in [0.2, 0.3, 0.5, 0.7, 1.0] {
        text.push_str(&format!("{d},{}\n", 2.5 * f64::powf(d, -1.0 / tau)));
    }
    fs::write(&path, text).unwrap();
    let fit = fit_file(&path, &FitOptions::new(FitKind::PowerLaw)).unwrap();
    assert!((fit.tau_or_delta - tau).abs() < 1e-10, "{fit:?}");
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(fit.n_points, 5);

    let windowed = fit_file(
        &path,
        &FitOptions {
            window: Some((0.25, 0.8)),
            ..FitOptions::new(FitKind::PowerLaw)
        },
    )
    .unwrap();
    assert_eq!(windowed.n_points, 3);
    assert_eq!(windowed.window, (0.3, 0.7));
}

#[test]
fn fit_reports_insufficient_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    fs::write(&path, "t_r,value\n1.0,0.5\n2.0,0.1\n").unwrap();
    let err = fit_file(&path, &FitOptions::new(FitKind::Gaussian)).unwrap_err();
    assert!(matches!(err, CliError::Core(compass_core::Error::InsufficientPoints { .. })), "{err}");
}

#[test]
fn fit_reads_gap_scans_from_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.model.sites = 100;
    c.time.t_max = 8.0;
    c.time.dt = 0.01;
    c.sweep.push(SweepAxis::list(SweepParameter::JEven, vec![2.5, 3.0, 4.0, 5.0]));
    run_sweep(&c, Some(dir.path()), false).unwrap();
    let csv = dir.path().join(SWEEP_CSV);
    let power = fit_file(&csv, &FitOptions::new(FitKind::PowerLaw)).unwrap();
    assert_eq!(power.n_points, 4);
    assert_eq!(power.window, (1.5, 4.0));
    assert!(power.slope.is_finite() && power.r_squared > 0.0);
    let gauss = fit_file(&csv, &FitOptions::new(FitKind::Gaussian)).unwrap();
    assert_eq!(gauss.n_points + gauss.skipped, 4);
}

#[test]
fn fit_refuses_to_mix_other_axes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.time.t_max = 0.5;
    c.sweep.push(SweepAxis::list(SweepParameter::G, vec![0.05, 0.1]));
    c.sweep.push(SweepAxis::list(SweepParameter::JEven, vec![2.0, 3.0, 4.0]));
    run_sweep(&c, Some(dir.path()), false).unwrap();
    let err = fit_file(&dir.path().join(SWEEP_CSV), &FitOptions::new(FitKind::PowerLaw)).unwrap_err();
    assert!(err.to_string().contains("axis `g`"), "{err}");
}

#[test]
fn validation_passes_and_catches_a_corrupted_propagator() {
    let clean = run_validation(&ValidateOptions::default());
    assert!(clean.passed(), "{clean}");
    assert!(clean.max_echo_discrepancy < 1e-7);

    let broken = run_validation(&ValidateOptions {
        corrupt_propagator_sign: true,
    });
    assert!(!broken.passed());
    let failed: Vec<&str> = broken.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"echo |F_14| vs dense oracle"), "{failed:?}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_compass");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, small_config().to_toml()).unwrap();

    let ok = Command::new(bin)
        .args(["--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "echo"])
        .env("COMPASS_THREADS", "2")
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join(ECHO_CSV).exists());

    fs::write(&config, "[model]\nsitez = 4\n").unwrap();
    let bad = Command::new(bin)
        .args(["--config", config.to_str().unwrap(), "echo"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("sitez"));

    let validate = Command::new(bin)
        .args(["validate", "--corrupt-propagator-sign"])
        .output()
        .unwrap();
    assert_eq!(validate.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&validate.stdout).contains("FAIL"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let config = RunConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
            assert!(fs::read_to_string(&path).unwrap().starts_with("# Units"));
            assert!(config.sweep.len() <= 2);
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
