//! Correlation measures against direct numerical definitions.

use compass_core::linalg::{hermitian_eigen, CMatrix};
use compass_core::measures::{
    assemble_xstate, concurrence, discord, eof, negativity, wootters_concurrence, InitialXState, QcRecord, XState,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32, seed: u64) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn entropy(rho: &CMatrix) -> f64 {
    hermitian_eigen(rho)
        .values
        .iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.log2())
        .sum()
}

fn partial_trace_b(rho: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2, 2, |a, a2| rho[(2 * a, 2 * a2)] + rho[(2 * a + 1, 2 * a2 + 1)])
}

fn partial_trace_a(rho: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2, 2, |b, b2| rho[(b, b2)] + rho[(2 + b, 2 + b2)])
}

/// Classical correlation `max_n [S(ρ_A) - Σ_± p_± S(ρ_A|±n)]` over projective
/// measurements of qubit B along a grid of Bloch directions.
fn brute_force_classical(rho: &CMatrix) -> f64 {
    let s_a = entropy(&partial_trace_b(rho));
    let mut best = f64::NEG_INFINITY;
    let steps = 60;
    for i in 0..=steps {
        let polar = std::f64::consts::PI * i as f64 / steps as f64;
        for j in 0..2 * steps {
            let azimuth = std::f64::consts::PI * j as f64 / steps as f64;
            let (nx, ny, nz) = (polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos());
            let mut conditional = 0.0;
            for s in [1.0, -1.0] {
                // projector ½(I + s n·σ) on B
                let proj = CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(0.5 * (1.0 + s * nz), 0.0),
                        Complex64::new(0.5 * s * nx, -0.5 * s * ny),
                        Complex64::new(0.5 * s * nx, 0.5 * s * ny),
                        Complex64::new(0.5 * (1.0 - s * nz), 0.0),
                    ],
                );
                let full = CMatrix::identity(2, 2).kronecker(&proj);
                let post = &full * rho * &full;
                let p = post.trace().re;
                if p > 1e-14 {
                    conditional += p * entropy(&partial_trace_b(&(post / Complex64::new(p, 0.0))));
                }
            }
            best = best.max(s_a - conditional);
        }
    }
    best
}

fn mutual_information(rho: &CMatrix) -> f64 {
    entropy(&partial_trace_b(rho)) + entropy(&partial_trace_a(rho)) - entropy(rho)
}

fn random_xstate(rng: &mut ChaCha8Rng) -> XState {
    loop {
        let c_z = rng.random_range(-1.0..1.0);
        let beta = Complex64::from_polar(rng.random_range(0.0..2.0), rng.random_range(0.0..6.3));
        let gamma = Complex64::from_polar(rng.random_range(0.0..2.0), rng.random_range(0.0..6.3));
        if let Ok(x) = XState::new(c_z, beta, gamma) {
            return x;
        }
    }
}

#[test]
fn closed_form_concurrence_matches_wootters_procedure() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x = random_xstate(&mut rng);
        worst = worst.max((concurrence(&x) - wootters_concurrence(&x.matrix())).abs());
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn bell_case_discord_never_exceeds_entanglement() {
    let bell = InitialXState::bell();
    for i in 0..=1000 {
        let f = i as f64 * 1e-3;
        let r = QcRecord::from_echo(&bell, 0.0, f).unwrap();
        assert!(r.discord <= r.eof + 1e-12, "|F| = {f}: D = {}, EoF = {}", r.discord, r.eof);
    }
}

#[test]
fn discord_matches_measurement_optimization() {
    let bell = InitialXState::bell();
    for f in [0.1, 0.35, 0.5, 0.8, 0.97] {
        let x = assemble_xstate(&bell, Complex64::new(f, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        let rho = x.matrix();
        let classical = brute_force_classical(&rho);
        let (q, c) = discord(&x);
        assert!((c - classical).abs() < 1e-6, "|F| = {f}: {c} vs {classical}");
        assert!((q - (mutual_information(&rho) - classical)).abs() < 1e-6);
    }
    // a non-Bell member of the family: c_x = 1, c_y = -c_z
    let mixed = InitialXState::new(1.0, -0.4, 0.4).unwrap();
    let x = assemble_xstate(&mixed, Complex64::new(0.6, 0.0), Complex64::new(1.0, 0.0)).unwrap();
    let rho = x.matrix();
    let (q, _) = discord(&x);
    assert!((q - (mutual_information(&rho) - brute_force_classical(&rho))).abs() < 1e-6);
}

#[test]
fn reference_values() {
    // h₂((1 + √0.75)/2)
    let f = 0.5 * (1.0 + 0.75_f64.sqrt());
    let h2 = -f * f.log2() - (1.0 - f) * (1.0 - f).log2();
    assert!((eof(0.5).unwrap() - h2).abs() < 1e-12);
    assert!((h2 - 0.35458).abs() < 1e-5);

    let bell = InitialXState::bell();
    let half = QcRecord::from_echo(&bell, 0.0, 0.5).unwrap();
    let expected = 0.75 * 1.5_f64.log2() + 0.25 * 0.5_f64.log2();
    assert!((half.discord - expected).abs() < 1e-12);
    assert!((half.discord - 0.18872).abs() < 1e-5);

    let x = assemble_xstate(&bell, Complex64::new(0.6, 0.0), Complex64::new(1.0, 0.0)).unwrap();
    assert!((negativity(&x) - 0.3).abs() < 1e-12);
}

proptest! {
    #![proptest_config(config(200, 0xdec0_0001))]

    #[test]
    fn measures_ignore_coherence_phases(
        c_z in -1.0..1.0f64,
        b in 0.0..1.0f64,
        g in 0.0..1.0f64,
        phase_b in 0.0..6.3f64,
        phase_g in 0.0..6.3f64,
    ) {
        let (b, g) = (b * (1.0 + c_z), g * (1.0 - c_z));
        let real = XState::new(c_z, Complex64::new(b, 0.0), Complex64::new(g, 0.0)).unwrap();
        let rotated = XState::new(c_z, Complex64::from_polar(b, phase_b), Complex64::from_polar(g, phase_g)).unwrap();
        prop_assert!((concurrence(&real) - concurrence(&rotated)).abs() < 1e-12);
        prop_assert!((negativity(&real) - negativity(&rotated)).abs() < 1e-12);
        prop_assert!((discord(&real).0 - discord(&rotated).0).abs() < 1e-12);
    }

    #[test]
    fn x_state_negativity_is_half_the_concurrence(
        c_z in -1.0..1.0f64,
        b in 0.0..1.0f64,
        g in 0.0..1.0f64,
    ) {
        let x = XState::new(c_z, Complex64::new(b * (1.0 + c_z), 0.0), Complex64::new(g * (1.0 - c_z), 0.0)).unwrap();
        prop_assert!((negativity(&x) - 0.5 * concurrence(&x)).abs() < 1e-12);
    }

    #[test]
    fn entanglement_of_formation_is_monotone(c1 in 0.0..1.0f64, c2 in 0.0..1.0f64) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(eof(lo).unwrap() <= eof(hi).unwrap() + 1e-15);
    }

    #[test]
    fn assembled_states_stay_physical(
        c_x in -1.0..1.0f64,
        c_y in -1.0..1.0f64,
        c_z in -1.0..1.0f64,
        f14 in 0.0..1.0f64,
        f23 in 0.0..1.0f64,
        phase in 0.0..6.3f64,
    ) {
        prop_assume!(InitialXState::new(c_x, c_y, c_z).is_ok());
        let initial = InitialXState::new(c_x, c_y, c_z).unwrap();
        let x = assemble_xstate(&initial, Complex64::from_polar(f14, phase), Complex64::new(f23, 0.0)).unwrap();
        prop_assert!(x.validate().is_ok());
        let min = hermitian_eigen(&x.matrix()).values[0];
        prop_assert!(min > -1e-12);
    }
}
