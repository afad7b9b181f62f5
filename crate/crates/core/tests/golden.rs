//! Frozen dense-simulation reference values.
//!
//! Regenerate with `cargo test -p compass-core --test golden -- --ignored`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::path::PathBuf;

use compass_core::oracle::{read_golden, write_golden, GoldenRecord};
use compass_core::{decoherence_factor, Boundary, CompassParams, CouplingSpec};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/echo_open.json")
}

fn reference_points() -> Vec<(CompassParams, CouplingSpec, f64)> {
    let open = |j_even, theta, field, sites| CompassParams::new(1.0, j_even, theta, field, sites, Boundary::Open).unwrap();
    let mut out = Vec::new();
    for t in [0.5, 1.0, 2.0, 5.0] {
        out.push((open(4.0, FRAC_PI_2, 0.0, 8), CouplingSpec::new(0.1).unwrap(), t));
    }
    for t in [1.0, 3.0] {
        out.push((open(4.0, FRAC_PI_3, 0.3, 8), CouplingSpec::new(0.2).unwrap(), t));
        out.push((open(2.5, 0.4, 0.7, 6), CouplingSpec::new(0.3).unwrap(), t));
        out.push((open(1.5, 0.0, 0.0, 8), CouplingSpec::new(0.1).unwrap(), t));
    }
    out
}

#[test]
#[ignore]
fn regenerate_golden_file() {
    let records: Vec<GoldenRecord> = reference_points()
        .iter()
        .map(|(p, c, t)| GoldenRecord::compute(p, c, *t).unwrap())
        .collect();
    std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
    write_golden(&golden_path(), &records).unwrap();
}

#[test]
fn engine_matches_golden_file() {
    let records = read_golden(&golden_path()).unwrap();
    assert_eq!(records.len(), reference_points().len());
    for r in &records {
        let engine = decoherence_factor(&r.params, &r.coupling, &[r.t]).unwrap().values[0];
        assert!((engine - r.magnitude()).abs() < 1e-8, "{r:?}: engine {engine}");
    }
}

#[test]
fn dense_simulation_reproduces_golden_file() {
    for r in read_golden(&golden_path()).unwrap() {
        let fresh = GoldenRecord::compute(&r.params, &r.coupling, r.t).unwrap();
        assert!((fresh.re - r.re).abs() < 1e-10 && (fresh.im - r.im).abs() < 1e-10, "{r:?}");
    }
}
