//! `validate`: engine against the dense oracle and structural invariants on
//! a fixed table of small chains.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use compass_core::fermion::Propagator;
use compass_core::linalg::{max_abs, CVector};
use compass_core::measures::{assemble_xstate, concurrence, wootters_concurrence};
use compass_core::model::momentum_grid;
use compass_core::oracle::{
    build_spin_hamiltonian, dense_ground_state, dense_hopping_correlation, dense_pairing_correlation,
    many_body_spectrum, ExactEcho, ExactReducedDensity,
};
use compass_core::{
    build_bdg, decoherence_factor_with, dispersion, ground_state, Boundary, CompassParams, CouplingSpec,
    EngineOptions, InitialXState, QcRecord, XState,
};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Flip the sign of the propagator phases (mutation fixture).
    pub corrupt_propagator_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<40} observed {:.3e}  tolerance {:.1e}", self.name, self.observed, self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Largest `||F|_engine - |F|_oracle|` over all echo cases.
    pub max_echo_discrepancy: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(f, "max |F| discrepancy vs dense oracle: {:.3e}", self.max_echo_discrepancy)?;
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn open(j_even: f64, theta: f64, field: f64, sites: usize) -> CompassParams {
    CompassParams::new(1.0, j_even, theta, field, sites, Boundary::Open).expect("fixed table is valid")
}

/// `(params, g)` cases: generic angles, both Ising limits, the compass point
/// with its zero modes, and a nonzero field.
fn echo_cases() -> Vec<(CompassParams, f64)> {
    vec![
        (open(4.0, FRAC_PI_2, 0.0, 8), 0.1),
        (open(4.0, PI / 3.0, 0.3, 8), 0.2),
        (open(2.5, 0.4, 0.7, 6), 0.3),
        (open(1.5, 0.0, 0.0, 8), 0.1),
        (open(3.0, PI, 0.5, 6), 0.25),
        (open(1.2, 2.2, 0.9, 4), 0.45),
        (open(4.8, 1.3, 0.1, 8), 0.05),
    ]
}

fn grid(t_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Errors count as infinite discrepancy so that they fail the check.
fn measured(f: impl FnOnce() -> compass_core::Result<f64>) -> f64 {
    f().unwrap_or(f64::INFINITY)
}

fn dense_evolve(params: &CompassParams, shift: f64, psi: &CVector, t: f64) -> compass_core::Result<CVector> {
    let eig = build_spin_hamiltonian(params, shift)?.eigen();
    let coeffs = eig.vectors.adjoint() * psi;
    let phased = CVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(&eig.values).map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
    );
    Ok(&eig.vectors * phased)
}

pub fn run_validation(options: &ValidateOptions) -> Report {
    let engine = EngineOptions {
        corrupt_propagator_sign: options.corrupt_propagator_sign,
        ..EngineOptions::default()
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, tolerance: f64, observed: f64| {
        checks.push(Check {
            name: name.to_string(),
            tolerance,
            observed,
            passed: observed < tolerance,
        })
    };
    let times = grid(5.0, 20);

    let echo = echo_cases()
        .iter()
        .map(|(params, g)| {
            measured(|| {
                let coupling = CouplingSpec::new(*g)?;
                let fast = decoherence_factor_with(params, &coupling, &times, &engine)?;
                let exact = ExactEcho::new(params, &coupling)?;
                let reference = times.iter().map(|&t| Ok(exact.factor(t)?.norm())).collect::<compass_core::Result<Vec<f64>>>()?;
                Ok(max_diff(&fast.values, &reference))
            })
        })
        .fold(0.0, f64::max);
    push("echo |F_14| vs dense oracle", 1e-7, echo);

    let quench = measured(|| {
        let mut worst: f64 = 0.0;
        for (params, shift, t) in [(open(3.0, 1.1, 0.35, 6), 0.2, 1.7), (open(4.0, FRAC_PI_2, 0.0, 6), -0.1, 3.0)] {
            let vacuum = ground_state(&build_bdg(&params, 0.0)?)?.state;
            let mut prop = Propagator::new(&build_bdg(&params, shift)?);
            if options.corrupt_propagator_sign {
                prop = prop.corrupt_sign();
            }
            let evolved = prop.evolve(&vacuum, t)?;
            let psi = dense_ground_state(&build_spin_hamiltonian(&params, 0.0)?).vector;
            let psi_t = dense_evolve(&params, shift, &psi, t)?;
            worst = worst
                .max(max_abs(&(evolved.hopping_correlation() - dense_hopping_correlation(&psi_t, params.sites))))
                .max(max_abs(&(evolved.pairing_correlation() - dense_pairing_correlation(&psi_t, params.sites))));
        }
        Ok(worst)
    });
    push("quench correlations vs dense evolution", 1e-8, quench);

    let constraints = measured(|| {
        let mut worst: f64 = 0.0;
        for (params, _) in echo_cases() {
            let vacuum = ground_state(&build_bdg(&params, 0.0)?)?.state;
            let evolved = Propagator::new(&build_bdg(&params, 0.15)?).evolve(&vacuum, 2.5)?;
            for s in [&vacuum, &evolved] {
                worst = worst.max(s.normalization_residual()).max(s.pairing_residual());
            }
        }
        Ok(worst)
    });
    push("Bogoliubov constraints", 1e-10, constraints);

    let structure = measured(|| {
        let mut worst: f64 = 0.0;
        for (params, _) in echo_cases() {
            let m = build_bdg(&params, 0.1)?;
            worst = worst.max(m.hermiticity_residual()).max(m.particle_hole_residual());
        }
        Ok(worst)
    });
    push("BdG hermiticity and particle-hole form", 1e-12, structure);

    let energy = measured(|| {
        let mut worst: f64 = 0.0;
        for (params, _) in echo_cases() {
            let fast = ground_state(&build_bdg(&params, 0.0)?)?.energy();
            let dense = dense_ground_state(&build_spin_hamiltonian(&params, 0.0)?).energy;
            worst = worst.max((fast - dense).abs());
        }
        Ok(worst)
    });
    push("ground energy vs dense oracle", 1e-9, energy);

    let spectrum = measured(|| {
        let mut worst: f64 = 0.0;
        for (params, _) in echo_cases() {
            let m = build_bdg(&params, 0.0)?;
            let rebuilt = many_body_spectrum(&m.quasiparticle_energies(), m.constant);
            let dense = build_spin_hamiltonian(&params, 0.0)?.eigen().values;
            worst = worst.max(max_diff(&rebuilt, dense.as_slice()));
        }
        Ok(worst)
    });
    push("many-body spectrum vs dense spectrum", 1e-9, spectrum);

    let disp = measured(|| {
        let mut worst: f64 = 0.0;
        for (theta, field) in [(FRAC_PI_2, 0.0), (0.7, 0.4), (2.4, 1.2)] {
            let params = CompassParams::new(1.0, 3.0, theta, field, 8, Boundary::PeriodicEvenSector)?;
            let mut numeric = build_bdg(&params, 0.0)?.quasiparticle_energies();
            let mut analytic = Vec::new();
            for k in momentum_grid(params.cells()) {
                let d = dispersion(&params, k)?;
                analytic.extend([d.e_upper, d.e_lower]);
            }
            numeric.sort_by(f64::total_cmp);
            analytic.sort_by(f64::total_cmp);
            worst = worst.max(max_diff(&numeric, &analytic));
        }
        Ok(worst)
    });
    push("dispersion vs BdG spectrum (N = 8 ring)", 1e-10, disp);

    let reduced = measured(|| {
        let params = open(4.0, 1.0, 0.2, 4);
        let coupling = CouplingSpec::new(0.3)?;
        let bell = InitialXState::bell();
        let ts = [0.5, 1.0, 2.0];
        let dense = ExactReducedDensity::new(&params, &coupling, &bell)?.at(&ts)?;
        let f14 = ExactEcho::new(&params, &coupling)?;
        let f23 = ExactEcho::with_pair(&params, &coupling, (2, 3))?;
        let mut worst: f64 = 0.0;
        for (&t, rho) in ts.iter().zip(&dense) {
            let x = assemble_xstate(&bell, f14.factor(t)?, f23.factor(t)?)?;
            worst = worst.max(max_abs(&(x.matrix() - rho)));
        }
        Ok(worst)
    });
    push("reduced density vs X-state assembly (N = 4)", 1e-7, reduced);

    let wootters = measured(|| {
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            let c_z = -0.95 + 0.09 * i as f64;
            for j in 0..=10 {
                let phase = 0.6 * j as f64;
                let beta = Complex64::from_polar(0.9 * (1.0 + c_z), phase);
                let gamma = Complex64::from_polar(0.4 * (1.0 - c_z), -1.3 * phase);
                let x = XState::new(c_z, beta, gamma)?;
                worst = worst.max((concurrence(&x) - wootters_concurrence(&x.matrix())).abs());
            }
        }
        Ok(worst)
    });
    push("closed-form vs Wootters concurrence", 1e-10, wootters);

    let ordering = measured(|| {
        let bell = InitialXState::bell();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let r = QcRecord::from_echo(&bell, 0.0, i as f64 * 1e-3)?;
            worst = worst.max(r.discord - r.eof);
        }
        Ok(worst.max(0.0))
    });
    push("discord <= EoF on the Bell grid", 1e-12, ordering);

    let reversal = measured(|| {
        let mut worst: f64 = 0.0;
        for (theta, field) in [(0.3, 0.2), (1.2, 0.8)] {
            let params = open(4.0, theta, field, 8);
            let coupling = CouplingSpec::new(0.2)?;
            let back: Vec<f64> = times.iter().rev().map(|t| -t).collect();
            let a = decoherence_factor_with(&params, &coupling, &times, &engine)?.values;
            let mut b = decoherence_factor_with(&params.with_theta(PI - theta), &coupling, &back, &engine)?.values;
            b.reverse();
            worst = worst.max(max_diff(&a, &b));
        }
        Ok(worst)
    });
    push("|F(pi - theta, t)| = |F(theta, -t)|", 1e-9, reversal);

    let parity = measured(|| {
        let params = open(2.0, 0.9, 0.4, 8);
        let plus = decoherence_factor_with(&params, &CouplingSpec::new(0.3)?, &times, &engine)?.values;
        let minus = decoherence_factor_with(&params, &CouplingSpec::new(-0.3)?, &times, &engine)?.values;
        Ok(max_diff(&plus, &minus))
    });
    push("echo even in g", 1e-9, parity);

    let f23 = measured(|| {
        let pair = EngineOptions {
            pair: (2, 3),
            ..engine
        };
        let params = open(4.0, 1.0, 0.2, 8);
        let v = decoherence_factor_with(&params, &CouplingSpec::new(0.3)?, &times, &pair)?.values;
        Ok(v.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
    });
    push("F_23 identically 1", 1e-15, f23);

    Report {
        checks,
        max_echo_discrepancy: echo,
    }
}
