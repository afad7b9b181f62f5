//! Dense exact simulator for small chains.
//!
//! Builds the spin Hamiltonian directly in the `2^N` computational basis
//! (site `l` is bit `l`, bit set means spin up), without any fermionization,
//! so it is an independent reference for the free-fermion engine.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::fermion::CouplingSpec;
use crate::linalg::{hermitian_eigen, max_abs, CMatrix, CVector, HermitianEigen, ONE, ZERO};
use crate::measures::InitialXState;
use crate::model::{Boundary, CompassParams};

pub const MAX_DENSE_SITES: usize = 14;
pub const MAX_FULL_SITES: usize = 10;
/// Eigenvalues closer than this (relative to `max(1, |E_0|)`) to the lowest
/// one belong to the ground manifold.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: CMatrix,
    /// Environment sites.
    pub sites: usize,
    /// Whether the two central qubits are included (dimension `4 * 2^N`).
    pub with_qubits: bool,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let scale = max_abs(&self.matrix).max(1.0);
        max_abs(&(&self.matrix - self.matrix.adjoint())) / scale
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.matrix)
    }
}

fn check_size(sites: usize, limit: usize) -> Result<()> {
    if sites > limit {
        return Err(Error::TooLarge { sites, limit });
    }
    Ok(())
}

/// Phase picked up by `σ̃(φ) = cos φ σˣ + sin φ σʸ` when it flips a spin:
/// `e^{-iφ}` for down -> up, `e^{iφ}` for up -> down.
fn flip_phase(axis: f64, was_up: bool) -> Complex64 {
    Complex64::from_polar(1.0, if was_up { axis } else { -axis })
}

/// Pseudo-spin axis of the bond starting at 0-based site `left`.
fn bond_axis(params: &CompassParams, left: usize) -> (f64, f64) {
    if left % 2 == 0 {
        (params.j_odd, 0.5 * params.theta)
    } else {
        (params.j_even, -0.5 * params.theta)
    }
}

/// Environment Hamiltonian with transverse field `h + field_shift`.
pub fn build_spin_hamiltonian(params: &CompassParams, field_shift: f64) -> Result<DenseOperator> {
    params.validate()?;
    ensure_finite("field_shift", field_shift)?;
    let n = params.sites;
    check_size(n, MAX_DENSE_SITES)?;
    let dim = 1usize << n;
    let field = params.field + field_shift;
    let bonds = match params.boundary {
        Boundary::Open => n - 1,
        Boundary::PeriodicEvenSector => n,
    };

    let mut h = CMatrix::zeros(dim, dim);
    for state in 0..dim {
        let up = state.count_ones() as f64;
        h[(state, state)] += Complex64::new(field * (2.0 * up - n as f64), 0.0);
        for left in 0..bonds {
            let right = (left + 1) % n;
            let (coupling, axis) = bond_axis(params, left);
            let phase = flip_phase(axis, state >> left & 1 == 1)
                * flip_phase(axis, state >> right & 1 == 1);
            let target = state ^ (1 << left) ^ (1 << right);
            h[(target, state)] += phase * coupling;
        }
    }
    Ok(DenseOperator {
        matrix: h,
        sites: n,
        with_qubits: false,
    })
}

/// `Σ_j σᶻ_j` as a diagonal.
fn total_sz(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| 2.0 * s.count_ones() as f64 - n as f64)
        .collect()
}

/// How a degenerate dense ground manifold was reduced to one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseTieBreak {
    FieldFirstOrder,
    FieldSecondOrder,
    /// The field does not split the manifold; the unique even-parity
    /// (`(-1)^{N_up} = +1`) state in it was taken.
    EvenParity,
    /// No rule applied; first manifold vector in eigensolver order.
    Arbitrary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseDegeneracy {
    /// Dimension of the ground manifold.
    pub manifold: usize,
    pub tie_break: DenseTieBreak,
}

#[derive(Debug, Clone)]
pub struct DenseGround {
    pub energy: f64,
    pub vector: CVector,
    /// Gap to the first state outside the ground manifold.
    pub gap: f64,
    pub degeneracy: Option<DenseDegeneracy>,
}

/// Lowest eigenvector of `k` if it is separated from the next one.
fn unique_lowest(k: &CMatrix) -> (HermitianEigen, bool) {
    let eig = hermitian_eigen(&((k + k.adjoint()) * Complex64::new(0.5, 0.0)));
    let unique = eig.values.len() < 2 || eig.values[1] - eig.values[0] > 1e-8;
    (eig, unique)
}

fn scale_rows(m: &CMatrix, weights: impl Fn(usize) -> f64) -> CMatrix {
    let mut out = m.clone();
    for (r, mut row) in out.row_iter_mut().enumerate() {
        row *= Complex64::new(weights(r), 0.0);
    }
    out
}

/// Ground state of a dense environment Hamiltonian.
///
/// A degenerate ground manifold is resolved by degenerate perturbation
/// theory in a small uniform field `δh Σσᶻ` (the `h -> 0⁺` limit): first
/// the lowest eigenvector of `Σσᶻ` projected onto the manifold, and if that
/// is degenerate, the lowest eigenvector of the second-order term
/// `-P Σσᶻ (H - E_0)⁺ Σσᶻ P` within it. If the field splits nothing, the
/// even-parity state of the manifold is taken when it is unique.
pub fn dense_ground_state(op: &DenseOperator) -> DenseGround {
    let eig = op.eigen();
    let e0 = eig.values[0];
    let tol = DEGENERACY_TOL * e0.abs().max(1.0);
    let manifold = eig.values.iter().take_while(|&&e| e - e0 <= tol).count();
    let gap = eig.values.get(manifold).map_or(f64::INFINITY, |e| e - e0);
    let single = |mut vector: CVector, tie_break: DenseTieBreak| {
        crate::linalg::fix_phase(&mut vector);
        DenseGround {
            energy: e0,
            vector,
            gap,
            degeneracy: (manifold > 1).then_some(DenseDegeneracy { manifold, tie_break }),
        }
    };
    if manifold == 1 || op.with_qubits {
        return single(eig.vectors.column(0).into_owned(), DenseTieBreak::Arbitrary);
    }

    let sz = total_sz(op.sites);
    let basis = eig.vectors.columns(0, manifold).into_owned();
    let (first, unique) = unique_lowest(&(basis.adjoint() * scale_rows(&basis, |r| sz[r])));
    if unique {
        return single(&basis * first.vectors.column(0), DenseTieBreak::FieldFirstOrder);
    }
    let lowest = first.values[0];
    let flat = first.values.iter().take_while(|&&d| d - lowest <= 1e-8).count();
    let sub = &basis * first.vectors.columns(0, flat);

    let excited = eig.vectors.columns(manifold, eig.values.len() - manifold);
    let proj = excited.adjoint() * scale_rows(&sub, |r| sz[r]);
    let scaled = scale_rows(&proj, |r| 1.0 / (eig.values[manifold + r] - e0));
    let (second, unique) = unique_lowest(&-(proj.adjoint() * scaled));
    if unique {
        return single(&sub * second.vectors.column(0), DenseTieBreak::FieldSecondOrder);
    }

    // -P restricted to the manifold; its lowest eigenvector is even
    let odd = |r: usize| if r.count_ones() % 2 == 0 { -1.0 } else { 1.0 };
    let (parity, unique) = unique_lowest(&(basis.adjoint() * scale_rows(&basis, odd)));
    if unique && parity.values[0] < -1.0 + 1e-8 {
        return single(&basis * parity.vectors.column(0), DenseTieBreak::EvenParity);
    }
    single(basis.column(0).into_owned(), DenseTieBreak::Arbitrary)
}

/// Exact `F_νμ(t) = ⟨ψ|e^{iH(h_μ)t} e^{-iH(h_ν)t}|ψ⟩` from dense
/// eigendecompositions, reusable across times.
#[derive(Debug, Clone)]
pub struct ExactEcho {
    ground: DenseGround,
    nu: Option<(HermitianEigen, CVector)>,
    mu: Option<(HermitianEigen, CVector)>,
}

impl ExactEcho {
    pub fn new(params: &CompassParams, coupling: &CouplingSpec) -> Result<Self> {
        Self::with_pair(params, coupling, (1, 4))
    }

    pub fn with_pair(params: &CompassParams, coupling: &CouplingSpec, pair: (usize, usize)) -> Result<Self> {
        let ground = dense_ground_state(&build_spin_hamiltonian(params, 0.0)?);
        let (eps_nu, eps_mu) = (coupling.epsilon(pair.0)?, coupling.epsilon(pair.1)?);
        let prepare = |eps: f64| -> Result<(HermitianEigen, CVector)> {
            let eig = build_spin_hamiltonian(params, eps)?.eigen();
            let coeffs = eig.vectors.adjoint() * &ground.vector;
            Ok((eig, coeffs))
        };
        let (nu, mu) = if eps_nu == eps_mu {
            (None, None)
        } else {
            (Some(prepare(eps_nu)?), Some(prepare(eps_mu)?))
        };
        Ok(Self { ground, nu, mu })
    }

    pub fn ground(&self) -> &DenseGround {
        &self.ground
    }

    /// `true` when the dense ground gap is below `1e-10`.
    pub fn degenerate(&self) -> bool {
        self.ground.degeneracy.is_some()
    }

    pub fn factor(&self, t: f64) -> Result<Complex64> {
        ensure_finite("t", t)?;
        let (Some((eig_nu, c_nu)), Some((eig_mu, c_mu))) = (&self.nu, &self.mu) else {
            return Ok(ONE);
        };
        if t == 0.0 {
            return Ok(ONE);
        }
        // Σ_ab conj(c_mu_a) e^{iλ_a t} (Q_mu† Q_nu)_ab e^{-iκ_b t} c_nu_b
        // collapses to the product of the two evolved vectors.
        let evolved = |eig: &HermitianEigen, c: &CVector| {
            let phased = CVector::from_iterator(
                c.len(),
                c.iter()
                    .zip(&eig.values)
                    .map(|(z, &l)| z * Complex64::from_polar(1.0, -l * t)),
            );
            &eig.vectors * phased
        };
        Ok(evolved(eig_mu, c_mu).dotc(&evolved(eig_nu, c_nu)))
    }
}

pub fn exact_decoherence_factor(params: &CompassParams, coupling: &CouplingSpec, t: f64) -> Result<Complex64> {
    ExactEcho::new(params, coupling)?.factor(t)
}

/// `σᶻ` on one of the central qubits in the 4-dim qubit space ordered
/// `↑↑, ↑↓, ↓↑, ↓↓` (qubit A is the high bit).
fn qubit_sz(which: usize) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (q, slot) in out.iter_mut().enumerate() {
        let bit = if which == 0 { q >> 1 } else { q } & 1;
        *slot = if bit == 0 { 1.0 } else { -1.0 };
    }
    out
}

/// `H_E ⊗ I_4 + (g/2)(σᶻ_A + σᶻ_B) Σ_j σᶻ_j` on the `4 · 2^N` space, with
/// the qubit index as the slow one.
pub fn build_full_hamiltonian(params: &CompassParams, coupling: &CouplingSpec) -> Result<DenseOperator> {
    check_size(params.sites, MAX_FULL_SITES)?;
    ensure_finite("g", coupling.g)?;
    let env = build_spin_hamiltonian(params, 0.0)?;
    let sz_env = CMatrix::from_diagonal(&CVector::from_iterator(
        env.dim(),
        total_sz(params.sites).into_iter().map(|x| Complex64::new(x, 0.0)),
    ));
    let (sa, sb) = (qubit_sz(0), qubit_sz(1));
    let qubit_part = CMatrix::from_diagonal(&CVector::from_iterator(
        4,
        (0..4).map(|q| Complex64::new(0.5 * coupling.g * (sa[q] + sb[q]), 0.0)),
    ));
    let matrix = CMatrix::identity(4, 4).kronecker(&env.matrix) + qubit_part.kronecker(&sz_env);
    Ok(DenseOperator {
        matrix,
        sites: params.sites,
        with_qubits: true,
    })
}

/// `σᶻ_A + σᶻ_B` embedded in the full space.
pub fn total_qubit_sz(sites: usize) -> CMatrix {
    let (sa, sb) = (qubit_sz(0), qubit_sz(1));
    let q = CMatrix::from_diagonal(&CVector::from_iterator(4, (0..4).map(|i| Complex64::new(sa[i] + sb[i], 0.0))));
    q.kronecker(&CMatrix::identity(1 << sites, 1 << sites))
}

/// Reduced two-qubit density matrix after evolving
/// `ρ_AB(0) ⊗ |ψ⟩⟨ψ|` under the full Hamiltonian and tracing out the chain.
pub fn exact_reduced_density(
    params: &CompassParams,
    coupling: &CouplingSpec,
    initial: &InitialXState,
    t: f64,
) -> Result<CMatrix> {
    Ok(ExactReducedDensity::new(params, coupling, initial)?
        .at(&[t])?
        .remove(0))
}

/// Reusable form of [`exact_reduced_density`] for several times.
#[derive(Debug, Clone)]
pub struct ExactReducedDensity {
    env_dim: usize,
    eigen: HermitianEigen,
    /// `(weight, eigenbasis coefficients)` of each pure component.
    components: Vec<(f64, CVector)>,
    initial: CMatrix,
}

impl ExactReducedDensity {
    pub fn new(params: &CompassParams, coupling: &CouplingSpec, initial: &InitialXState) -> Result<Self> {
        initial.validate()?;
        let full = build_full_hamiltonian(params, coupling)?;
        let psi = dense_ground_state(&build_spin_hamiltonian(params, 0.0)?).vector;
        let rho0 = initial.density_matrix();
        let eigen = full.eigen();
        let mixture = hermitian_eigen(&rho0);
        let components = mixture
            .values
            .iter()
            .zip(mixture.vectors.column_iter())
            .filter(|(&p, _)| p > 1e-15)
            .map(|(&p, a)| {
                let product = a.kronecker(&psi);
                (p, eigen.vectors.adjoint() * product)
            })
            .collect();
        Ok(Self {
            env_dim: psi.len(),
            eigen,
            components,
            initial: rho0,
        })
    }

    pub fn at(&self, times: &[f64]) -> Result<Vec<CMatrix>> {
        times
            .iter()
            .map(|&t| {
                ensure_finite("t", t)?;
                if t == 0.0 {
                    return Ok(self.initial.clone());
                }
                let mut rho = CMatrix::zeros(4, 4);
                for (p, coeffs) in &self.components {
                    let phased = CVector::from_iterator(
                        coeffs.len(),
                        coeffs
                            .iter()
                            .zip(&self.eigen.values)
                            .map(|(z, &l)| z * Complex64::from_polar(1.0, -l * t)),
                    );
                    let state = &self.eigen.vectors * phased;
                    // view as a 4 x 2^N matrix (qubit row, environment column)
                    let block = CMatrix::from_fn(4, self.env_dim, |q, e| state[q * self.env_dim + e]);
                    rho += (&block * block.adjoint()) * Complex64::new(*p, 0.0);
                }
                Ok(rho)
            })
            .collect()
    }
}

/// `c_j |ψ⟩` for the Jordan-Wigner fermions `c_j = Π_{l<j} (-σᶻ_l) σ⁻_j`.
pub fn apply_annihilation(psi: &CVector, site: usize) -> CVector {
    let mut out = CVector::from_element(psi.len(), ZERO);
    let below = (1usize << site) - 1;
    for (state, &amp) in psi.iter().enumerate() {
        if state >> site & 1 == 1 {
            let sign = if (state & below).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[state ^ (1 << site)] += amp * sign;
        }
    }
    out
}

/// Dense `⟨c_i† c_j⟩`.
pub fn dense_hopping_correlation(psi: &CVector, sites: usize) -> CMatrix {
    let c: Vec<CVector> = (0..sites).map(|j| apply_annihilation(psi, j)).collect();
    CMatrix::from_fn(sites, sites, |i, j| c[i].dotc(&c[j]))
}

/// Dense `⟨c_i c_j⟩`.
pub fn dense_pairing_correlation(psi: &CVector, sites: usize) -> CMatrix {
    CMatrix::from_fn(sites, sites, |i, j| {
        psi.dotc(&apply_annihilation(&apply_annihilation(psi, j), i))
    })
}

/// Every many-body energy `Σ_n E_n (s_n - ½) + constant`, ascending.
pub fn many_body_spectrum(quasiparticle_energies: &[f64], constant: f64) -> Vec<f64> {
    let n = quasiparticle_energies.len();
    let base = constant - 0.5 * quasiparticle_energies.iter().sum::<f64>();
    let mut out: Vec<f64> = (0..1usize << n)
        .map(|mask| {
            base + (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| quasiparticle_energies[i])
                .sum::<f64>()
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// One reference value of the exact decoherence factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub params: CompassParams,
    pub coupling: CouplingSpec,
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

impl GoldenRecord {
    pub fn compute(params: &CompassParams, coupling: &CouplingSpec, t: f64) -> Result<Self> {
        let f = exact_decoherence_factor(params, coupling, t)?;
        Ok(Self {
            params: *params,
            coupling: *coupling,
            t,
            re: f.re,
            im: f.im,
        })
    }

    pub fn magnitude(&self) -> f64 {
        Complex64::new(self.re, self.im).norm()
    }
}

pub fn read_golden(path: &Path) -> Result<Vec<GoldenRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Golden(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Golden(e.to_string()))
}

pub fn write_golden(path: &Path, records: &[GoldenRecord]) -> Result<()> {
    let text = serde_json::to_string_pretty(records).map_err(|e| Error::Golden(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Golden(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn params(theta: f64, n: usize) -> CompassParams {
        CompassParams::new(1.0, 4.0, theta, 0.0, n, Boundary::Open).unwrap()
    }

    #[test]
    fn theta_zero_is_pure_x_bond_model() {
        let p = CompassParams::new(1.0, 2.0, 0.0, 0.3, 4, Boundary::Open).unwrap();
        let h = build_spin_hamiltonian(&p, 0.0).unwrap();
        let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let sz = CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]);
        let id = CMatrix::identity(2, 2);
        // site l is bit l, so it sits at position N-1-l in a Kronecker chain
        let embed = |ops: &[(usize, &CMatrix)]| {
            let mut m = CMatrix::identity(1, 1);
            for site in (0..4).rev() {
                let op = ops.iter().find(|(s, _)| *s == site).map_or(&id, |(_, o)| *o);
                m = m.kronecker(op);
            }
            m
        };
        let mut expected = CMatrix::zeros(16, 16);
        for (l, j) in [(0, 1.0), (1, 2.0), (2, 1.0)] {
            expected += embed(&[(l, &sx), (l + 1, &sx)]) * Complex64::new(j, 0.0);
        }
        for l in 0..4 {
            expected += embed(&[(l, &sz)]) * Complex64::new(0.3, 0.0);
        }
        assert!(max_abs(&(h.matrix - expected)) < 1e-14);
    }

    #[test]
    fn compass_point_spectrum_is_symmetric() {
        let h = build_spin_hamiltonian(&params(FRAC_PI_2, 4), 0.0).unwrap();
        assert!(h.hermiticity_residual() < 1e-14);
        let e = h.eigen().values;
        for (a, b) in e.iter().zip(e.iter().rev()) {
            assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_large_chains() {
        let p = params(0.3, 16);
        assert!(matches!(build_spin_hamiltonian(&p, 0.0), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn exact_factor_trivial_cases() {
        let p = params(0.8, 6);
        let zero = CouplingSpec::new(0.0).unwrap();
        assert_eq!(exact_decoherence_factor(&p, &zero, 1.3).unwrap(), ONE);
        let c = CouplingSpec::new(0.2).unwrap();
        assert_eq!(exact_decoherence_factor(&p, &c, 0.0).unwrap(), ONE);
        assert!(exact_decoherence_factor(&p, &c, 2.0).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn qubit_field_commutes_with_full_hamiltonian() {
        let p = CompassParams::new(1.0, 3.0, 1.2, 0.4, 4, Boundary::Open).unwrap();
        let h = build_full_hamiltonian(&p, &CouplingSpec::new(0.3).unwrap()).unwrap();
        let s = total_qubit_sz(4);
        assert!(max_abs(&(&s * &h.matrix - &h.matrix * &s)) < 1e-12);
    }

    #[test]
    fn annihilation_anticommutes() {
        let psi = CVector::from_fn(16, |i, _| Complex64::new(i as f64 + 1.0, 0.5 * i as f64));
        let a = apply_annihilation(&apply_annihilation(&psi, 1), 3);
        let b = apply_annihilation(&apply_annihilation(&psi, 3), 1);
        assert!((a + b).norm() < 1e-12);
    }
}
