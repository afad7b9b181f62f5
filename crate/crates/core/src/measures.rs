//! Two-qubit X states and their quantum-correlation measures.
//!
//! Basis order is `↑↑, ↑↓, ↓↑, ↓↓`. All logarithms are base 2 with
//! `0 log 0 = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, ZERO};

const POSITIVITY_TOL: f64 = 1e-12;

/// `ρ_AB(0) = ¼ (I + Σ_α c_α σ^α ⊗ σ^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialXState {
    pub c_x: f64,
    pub c_y: f64,
    pub c_z: f64,
}

impl InitialXState {
    pub fn new(c_x: f64, c_y: f64, c_z: f64) -> Result<Self> {
        let s = Self { c_x, c_y, c_z };
        s.validate()?;
        Ok(s)
    }

    /// `(|↑↑⟩ + |↓↓⟩)/√2`.
    pub fn bell() -> Self {
        Self {
            c_x: 1.0,
            c_y: -1.0,
            c_z: 1.0,
        }
    }

    /// The four eigenvalues of `ρ_AB(0)`.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let (d1, d2) = (self.c_x - self.c_y, self.c_x + self.c_y);
        [
            (1.0 + self.c_z + d1) / 4.0,
            (1.0 + self.c_z - d1) / 4.0,
            (1.0 - self.c_z + d2) / 4.0,
            (1.0 - self.c_z - d2) / 4.0,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("c_x", self.c_x)?;
        ensure_finite("c_y", self.c_y)?;
        ensure_finite("c_z", self.c_z)?;
        if let Some(e) = self.eigenvalues().iter().find(|&&e| e < -POSITIVITY_TOL / 4.0) {
            return Err(invalid(
                "initial",
                format!("(c_x, c_y, c_z) = ({}, {}, {}) gives eigenvalue {e}", self.c_x, self.c_y, self.c_z),
            ));
        }
        Ok(())
    }

    pub fn density_matrix(&self) -> CMatrix {
        XState {
            c_z: self.c_z,
            c_beta: Complex64::new(self.c_x - self.c_y, 0.0),
            c_gamma: Complex64::new(self.c_x + self.c_y, 0.0),
        }
        .matrix()
    }
}

/// `¼ [[1+c_z, 0, 0, c_β], [0, 1-c_z, c_γ, 0], [0, c_γ*, 1-c_z, 0], [c_β*, 0, 0, 1+c_z]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XState {
    pub c_z: f64,
    pub c_beta: Complex64,
    pub c_gamma: Complex64,
}

impl XState {
    pub fn new(c_z: f64, c_beta: Complex64, c_gamma: Complex64) -> Result<Self> {
        let x = Self { c_z, c_beta, c_gamma };
        x.validate()?;
        Ok(x)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("c_z", self.c_z)?;
        if !(self.c_beta.norm().is_finite() && self.c_gamma.norm().is_finite()) {
            return Err(invalid("x_state", "non-finite coherence"));
        }
        let (b, g) = (self.c_beta.norm(), self.c_gamma.norm());
        let diag = [
            1.0 + self.c_z + b,
            1.0 + self.c_z - b,
            1.0 - self.c_z + g,
            1.0 - self.c_z - g,
        ];
        if let Some(e) = diag.iter().find(|&&e| e / 4.0 < -POSITIVITY_TOL) {
            return Err(invalid("x_state", format!("negative eigenvalue {}", e / 4.0)));
        }
        Ok(())
    }

    pub fn matrix(&self) -> CMatrix {
        let q = |x: f64| Complex64::new(x / 4.0, 0.0);
        let (b, g) = (self.c_beta / 4.0, self.c_gamma / 4.0);
        let (p, m) = (q(1.0 + self.c_z), q(1.0 - self.c_z));
        CMatrix::from_row_slice(
            4,
            4,
            &[
                p, ZERO, ZERO, b, //
                ZERO, m, g, ZERO, //
                ZERO, g.conj(), m, ZERO, //
                b.conj(), ZERO, ZERO, p,
            ],
        )
    }

    /// Reads `(c_z, c_β, c_γ)` back from a 4x4 matrix, rejecting anything
    /// outside the family by more than `tol`.
    pub fn from_density(rho: &CMatrix, tol: f64) -> Result<Self> {
        if rho.shape() != (4, 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: rho.nrows(),
            });
        }
        let allowed = |i: usize, j: usize| i == j || i + j == 3;
        for i in 0..4 {
            for j in 0..4 {
                if !allowed(i, j) && rho[(i, j)].norm() > tol {
                    return Err(Error::NotBellDiagonal(format!("entry ({i}, {j}) = {}", rho[(i, j)])));
                }
            }
        }
        let checks = [
            (rho[(0, 0)] - rho[(3, 3)]).norm(),
            (rho[(1, 1)] - rho[(2, 2)]).norm(),
            (rho.trace() - Complex64::new(1.0, 0.0)).norm(),
            (rho[(0, 3)] - rho[(3, 0)].conj()).norm(),
            (rho[(1, 2)] - rho[(2, 1)].conj()).norm(),
        ];
        if let Some(c) = checks.iter().find(|&&c| c > tol) {
            return Err(Error::NotBellDiagonal(format!("structure violated by {c:e}")));
        }
        let c_z = 2.0 * (rho[(0, 0)].re + rho[(3, 3)].re) - 1.0;
        Self::new(c_z, 4.0 * rho[(0, 3)], 4.0 * rho[(1, 2)])
    }
}

/// `c_β = (c_x - c_y) F_14`, `c_γ = (c_x + c_y) F_23`.
pub fn assemble_xstate(initial: &InitialXState, f14: Complex64, f23: Complex64) -> Result<XState> {
    initial.validate()?;
    for (name, f) in [("F14", f14), ("F23", f23)] {
        if !(f.norm() <= 1.0 + 1e-12) {
            return Err(invalid(name, format!("|{name}| must be <= 1, got {}", f.norm())));
        }
    }
    Ok(XState {
        c_z: initial.c_z,
        c_beta: (initial.c_x - initial.c_y) * f14,
        c_gamma: (initial.c_x + initial.c_y) * f23,
    })
}

/// Closed-form concurrence of an X state.
pub fn concurrence(x: &XState) -> f64 {
    let a = (x.c_beta.norm() + x.c_z - 1.0) / 2.0;
    let b = (x.c_gamma.norm() - x.c_z - 1.0) / 2.0;
    a.max(b).max(0.0)
}

/// Concurrence of an arbitrary two-qubit density matrix from the square roots
/// of the eigenvalues of `ρ (σʸ⊗σʸ) ρ* (σʸ⊗σʸ)`.
pub fn wootters_concurrence(rho: &CMatrix) -> f64 {
    // σʸ⊗σʸ in this basis
    let mut yy = CMatrix::zeros(4, 4);
    for (i, j, s) in [(0, 3, -1.0), (3, 0, -1.0), (1, 2, 1.0), (2, 1, 1.0)] {
        yy[(i, j)] = Complex64::new(s, 0.0);
    }
    let tilde = &yy * rho.conjugate() * &yy;
    // eigenvalues of ρ ρ̃ equal those of the Hermitian √ρ ρ̃ √ρ
    let eig = hermitian_eigen(rho);
    let sqrt_diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        4,
        eig.values.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    let root = &eig.vectors * sqrt_diag * eig.vectors.adjoint();
    let r = &root * tilde * &root;
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = hermitian_eigen(&r).values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy of `f = (1 + √(1 - C²)) / 2`.
pub fn eof(c: f64) -> Result<f64> {
    ensure_finite("concurrence", c)?;
    if !(-1e-12..=1.0 + 1e-12).contains(&c) {
        return Err(invalid("concurrence", format!("must lie in [0, 1], got {c}")));
    }
    let c = c.clamp(0.0, 1.0);
    let f = 0.5 * (1.0 + (1.0 - c * c).sqrt());
    Ok(-xlog2x(f) - xlog2x(1.0 - f))
}

/// Quantum discord and classical correlation of a Bell-diagonal X state.
pub fn discord(x: &XState) -> (f64, f64) {
    let (b, g) = (x.c_beta.norm(), x.c_gamma.norm());
    let mut mutual = 0.0;
    for s in [1.0, -1.0] {
        mutual += xlog2x(1.0 - x.c_z + s * g) + xlog2x(1.0 + x.c_z + s * b);
    }
    mutual /= 4.0;
    let theta = x.c_z.abs().max(0.5 * (b + g));
    let classical: f64 = [1.0, -1.0].iter().map(|s| 0.5 * xlog2x(1.0 + s * theta)).sum();
    ((mutual - classical).max(0.0), classical)
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^{T_B}`.
pub fn negativity(x: &XState) -> f64 {
    let rho = x.matrix();
    let pt = CMatrix::from_fn(4, 4, |r, c| {
        let (a, b) = (r >> 1, r & 1);
        let (a2, b2) = (c >> 1, c & 1);
        rho[(a * 2 + b2, a2 * 2 + b)]
    });
    hermitian_eigen(&pt).values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum()
}

/// All correlation measures at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcRecord {
    pub t: f64,
    pub abs_f: f64,
    pub concurrence: f64,
    pub eof: f64,
    pub discord: f64,
    pub classical: f64,
    pub negativity: f64,
}

impl QcRecord {
    /// Measures of `assemble_xstate(initial, |F_14|, 1)`.
    pub fn from_echo(initial: &InitialXState, t: f64, abs_f: f64) -> Result<Self> {
        let x = assemble_xstate(initial, Complex64::new(abs_f, 0.0), Complex64::new(1.0, 0.0))?;
        Self::from_xstate(&x, t, abs_f)
    }

    pub fn from_xstate(x: &XState, t: f64, abs_f: f64) -> Result<Self> {
        let c = concurrence(x);
        let (q, cl) = discord(x);
        Ok(Self {
            t,
            abs_f,
            concurrence: c,
            eof: eof(c)?,
            discord: q,
            classical: cl,
            negativity: negativity(x),
        })
    }
}
