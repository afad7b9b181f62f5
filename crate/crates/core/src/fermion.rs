//! Gaussian-state engine: Bogoliubov vacua, exact propagation, Onishi
//! overlaps and the decoherence factor `|F_νμ(t)|`.
//!
//! A Gaussian pure state is stored as the stacked `2N x N` matrix
//! `W = (U; V)` whose columns `w_n` define the quasiparticle annihilators
//! `γ_n = w_n† Ψ` that annihilate it. Under `H = ½ Ψ† M Ψ` the columns evolve
//! as `w_n(t) = e^{-iMt} w_n`, and `|⟨a|b⟩| = |det(W_a† W_b)|^{1/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::linalg::{fix_phase, hermitian_eigen, log_abs_det, max_abs, phase_rotate, CMatrix, CVector, HermitianEigen};
use crate::model::{build_bdg, momentum_block, momentum_grid, BdgMatrix, Boundary, CompassParams};

/// Eigenvalues with `|E|` below this are treated as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-10;
const SPLIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    stacked: CMatrix,
}

impl GaussianState {
    pub fn from_blocks(u: &CMatrix, v: &CMatrix) -> Result<Self> {
        let n = u.nrows();
        for (found, expected) in [(u.ncols(), n), (v.nrows(), n), (v.ncols(), n)] {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        let mut stacked = CMatrix::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(u);
        stacked.view_mut((n, 0), (n, n)).copy_from(v);
        Ok(Self { stacked })
    }

    fn from_stacked(stacked: CMatrix) -> Self {
        debug_assert_eq!(stacked.nrows(), 2 * stacked.ncols());
        Self { stacked }
    }

    pub fn sites(&self) -> usize {
        self.stacked.ncols()
    }

    pub fn stacked(&self) -> &CMatrix {
        &self.stacked
    }

    pub fn u(&self) -> CMatrix {
        let n = self.sites();
        self.stacked.view((0, 0), (n, n)).into_owned()
    }

    pub fn v(&self) -> CMatrix {
        let n = self.sites();
        self.stacked.view((n, 0), (n, n)).into_owned()
    }

    /// `max |U†U + V†V - I|`.
    pub fn normalization_residual(&self) -> f64 {
        let n = self.sites();
        let gram = self.stacked.adjoint() * &self.stacked;
        max_abs(&(gram - CMatrix::identity(n, n)))
    }

    /// `max |UᵀV + VᵀU|`.
    pub fn pairing_residual(&self) -> f64 {
        let (u, v) = (self.u(), self.v());
        max_abs(&(u.transpose() * &v + v.transpose() * &u))
    }

    /// `⟨Ψ_a Ψ_b†⟩ = (W W†)_{ab}`.
    pub fn nambu_correlation(&self) -> CMatrix {
        &self.stacked * self.stacked.adjoint()
    }

    /// `G_ij = ⟨c_i† c_j⟩`.
    pub fn hopping_correlation(&self) -> CMatrix {
        let n = self.sites();
        let v = self.v();
        // ⟨c_i† c_j⟩ = ⟨Ψ_{N+i} Ψ_{N+j}†⟩
        (&v * v.adjoint()).view((0, 0), (n, n)).into_owned()
    }

    /// `F_ij = ⟨c_i c_j⟩`.
    pub fn pairing_correlation(&self) -> CMatrix {
        self.u() * self.v().adjoint()
    }

    /// Fermion parity `(-1)^{N_f}` of the vacuum: the sign of
    /// `det [W, C W]`, which is `+1` for the empty state `W = (I; 0)`.
    pub fn parity(&self) -> f64 {
        let n = self.sites();
        let mut full = CMatrix::zeros(2 * n, 2 * n);
        full.columns_mut(0, n).copy_from(&self.stacked);
        full.columns_mut(n, n).copy_from(&conjugate_partner(&self.stacked));
        full.determinant().re.signum()
    }

    /// `⟨H⟩` including the normal-ordering constant of `m`.
    pub fn energy(&self, m: &BdgMatrix) -> Result<f64> {
        self.check_dim(m.sites)?;
        // ⟨½ Ψ†MΨ⟩ = ½ tr M - ½ tr(M W W†) and tr M = 0.
        let inner = (self.stacked.adjoint() * &m.matrix * &self.stacked).trace();
        Ok(-0.5 * inner.re + m.constant)
    }

    fn check_dim(&self, sites: usize) -> Result<()> {
        if self.sites() != sites {
            return Err(Error::DimensionMismatch {
                expected: sites,
                found: self.sites(),
            });
        }
        Ok(())
    }
}

/// Couplings `ε = (g, 0, 0, -g)` of the four central-qubit product states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub g: f64,
}

impl CouplingSpec {
    pub fn new(g: f64) -> Result<Self> {
        ensure_finite("g", g)?;
        Ok(Self { g })
    }

    /// `ε_μ`, with `μ` one-based.
    pub fn epsilon(&self, mu: usize) -> Result<f64> {
        match mu {
            1 => Ok(self.g),
            2 | 3 => Ok(0.0),
            4 => Ok(-self.g),
            _ => Err(invalid("mu", format!("must be in 1..=4, got {mu}"))),
        }
    }

    pub fn epsilons(&self) -> [f64; 4] {
        [self.g, 0.0, 0.0, -self.g]
    }

    pub fn shifted_field(&self, h: f64, mu: usize) -> Result<f64> {
        Ok(h + self.epsilon(mu)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModeResolution {
    /// Split at first order in an infinitesimal positive field.
    FieldFirstOrder,
    /// First order vanishes; split at second order in the field (same result
    /// for either sign of the field).
    FieldSecondOrder,
    /// The field leaves the zero modes degenerate; they were recombined into
    /// Majorana pairs in index order and the even-parity vacuum was taken.
    /// Convention dependent beyond a single pair.
    MajoranaIndexOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyWarning {
    /// Number of single-particle eigenvalues of `M` with `|E| < 1e-10`.
    pub zero_modes: usize,
    pub resolution: ZeroModeResolution,
    pub field_shift: f64,
}

impl std::fmt::Display for DegeneracyWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let how = match self.resolution {
            ZeroModeResolution::FieldFirstOrder => "resolved at first order in the field",
            ZeroModeResolution::FieldSecondOrder => "resolved at second order in the field",
            ZeroModeResolution::MajoranaIndexOrder => {
                "unsplit by the field; even-parity vacuum from index-ordered Majorana pairing"
            }
        };
        write!(
            f,
            "{} zero modes at field shift {}; {how}",
            self.zero_modes, self.field_shift
        )
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: GaussianState,
    /// Quasiparticle energies in ascending order, one per mode.
    pub energies: Vec<f64>,
    pub warning: Option<DegeneracyWarning>,
}

impl GroundState {
    pub fn energy(&self) -> f64 {
        -0.5 * self.energies.iter().sum::<f64>()
    }
}

/// `|E|` below this (but above [`ZERO_MODE_TOL`]) marks a `±E` pair that the
/// eigensolver may have mixed; such pairs are rebuilt from a Majorana basis.
const NEAR_ZERO: f64 = 1e-6;

/// Positive-energy modes of a Nambu matrix with `D = diag(I, -I)` structure.
struct Vacuum {
    /// `(energy, mode)`, ascending in energy.
    modes: Vec<(f64, CVector)>,
    zero_modes: usize,
    resolution: Option<ZeroModeResolution>,
    /// Zero space the field could not split, left to the caller.
    unresolved: Option<CMatrix>,
}

fn columns(m: &CMatrix, idx: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), idx.len());
    for (c, &i) in idx.iter().enumerate() {
        out.set_column(c, &m.column(i));
    }
    out
}

/// `D w` with `D = diag(I, -I)`, the generator of a uniform field shift.
fn apply_d(w: &CMatrix) -> CMatrix {
    let half = w.nrows() / 2;
    let mut out = w.clone();
    out.rows_mut(half, half).iter_mut().for_each(|x| *x = -*x);
    out
}

/// `refine` rebuilds near-zero `±E` pairs and splits zero modes with exact
/// particle-hole structure; it needs the full Nambu space, so momentum
/// blocks pass `false`.
fn select_vacuum(eigen: &HermitianEigen, refine: bool) -> Result<Vacuum> {
    let dim = eigen.values.len();
    let half = dim / 2;
    let values = &eigen.values;
    let positive: Vec<usize> = (0..dim).filter(|&i| values[i] > ZERO_MODE_TOL).collect();
    let zero: Vec<usize> = (0..dim).filter(|&i| values[i].abs() <= ZERO_MODE_TOL).collect();
    if zero.len() % 2 != 0 || positive.len() + zero.len() / 2 != half {
        return Err(Error::Spectrum(format!(
            "{} positive and {} zero eigenvalues for dimension {dim}",
            positive.len(),
            zero.len()
        )));
    }

    let near: Vec<usize> = (0..dim)
        .filter(|&i| values[i].abs() > ZERO_MODE_TOL && values[i].abs() < NEAR_ZERO)
        .collect();
    let refined = if refine && !near.is_empty() {
        refine_pairs(eigen, &near)
    } else {
        None
    };
    let mut modes: Vec<(f64, CVector)> = positive
        .iter()
        .filter(|&&i| refined.is_none() || values[i] >= NEAR_ZERO)
        .map(|&i| (values[i], eigen.vectors.column(i).into_owned()))
        .collect();
    modes.extend(refined.into_iter().flatten());

    let mut vacuum = Vacuum {
        modes,
        zero_modes: zero.len(),
        resolution: None,
        unresolved: None,
    };
    if !zero.is_empty() {
        let z = columns(&eigen.vectors, &zero);
        let split = if refine {
            split_zero_space(&z, eigen)
        } else {
            split_block_zero_space(&z, eigen)
        };
        match split {
            Some((split, order)) => {
                vacuum.modes.extend(split.column_iter().map(|c| (0.0, c.into_owned())));
                vacuum.resolution = Some(order);
            }
            None => {
                vacuum.resolution = Some(ZeroModeResolution::MajoranaIndexOrder);
                vacuum.unresolved = Some(z);
            }
        }
    }
    vacuum.modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(vacuum)
}

/// `-B† D M⁺ D B`, the second-order field term on the columns of `b`.
fn second_order_field(b: &CMatrix, eigen: &HermitianEigen) -> CMatrix {
    let proj = eigen.vectors.adjoint() * apply_d(b);
    let mut scaled = proj.clone();
    for (r, &e) in eigen.values.iter().enumerate() {
        let inv = if e.abs() > ZERO_MODE_TOL { 1.0 / e } else { 0.0 };
        scaled.row_mut(r).iter_mut().for_each(|x| *x *= inv);
    }
    -(proj.adjoint() * scaled)
}

/// Degenerate perturbation theory in a small uniform field `δh`, which
/// shifts `M` by `2δh D`.
///
/// First order acts on the zero space as `Z† D Z`. Directions it leaves at
/// zero are split at second order by `-Z₀† D M⁺ D Z₀`, which is even in
/// `δh`. Both are particle-hole odd, so in a Majorana basis they are `i`
/// times a real antisymmetric matrix whose real Schur form gives exactly
/// conjugate `±` pairs. Returns the modes pushed to positive energy, or
/// `None` if some direction stays unsplit.
fn split_zero_space(z: &CMatrix, eigen: &HermitianEigen) -> Option<(CMatrix, ZeroModeResolution)> {
    let basis = majorana_basis(z)?;
    let first = schur_pairs(&basis, &(basis.adjoint() * apply_d(&basis)), SPLIT_TOL);
    let mut kept: Vec<CVector> = first.split.into_iter().map(|(_, w)| w).collect();
    let mut order = ZeroModeResolution::FieldFirstOrder;
    if !first.flat.is_empty() {
        order = ZeroModeResolution::FieldSecondOrder;
        let flat = CMatrix::from_columns(&first.flat);
        let second = schur_pairs(&flat, &second_order_field(&flat, eigen), SPLIT_TOL);
        if !second.flat.is_empty() {
            return None;
        }
        kept.extend(second.split.into_iter().map(|(_, w)| w));
    }
    (2 * kept.len() == z.ncols()).then(|| (CMatrix::from_columns(&kept), order))
}

/// [`split_zero_space`] for a momentum block, which is not closed under
/// particle-hole conjugation: the same two orders, diagonalized directly.
fn split_block_zero_space(z: &CMatrix, eigen: &HermitianEigen) -> Option<(CMatrix, ZeroModeResolution)> {
    let first = hermitian_eigen(&(z.adjoint() * apply_d(z)));
    let mut kept: Vec<CVector> = Vec::new();
    let mut flat: Vec<usize> = Vec::new();
    for (i, &d) in first.values.iter().enumerate() {
        if d > SPLIT_TOL {
            kept.push(z * first.vectors.column(i));
        } else if d.abs() <= SPLIT_TOL {
            flat.push(i);
        }
    }
    let mut order = ZeroModeResolution::FieldFirstOrder;
    if !flat.is_empty() {
        order = ZeroModeResolution::FieldSecondOrder;
        let z0 = z * columns(&first.vectors, &flat);
        let k2 = second_order_field(&z0, eigen);
        let k2 = (&k2 + k2.adjoint()) * Complex64::new(0.5, 0.0);
        let second = hermitian_eigen(&k2);
        if second.values.iter().any(|k| k.abs() <= SPLIT_TOL) {
            return None;
        }
        for (i, &k) in second.values.iter().enumerate() {
            if k > 0.0 {
                kept.push(&z0 * second.vectors.column(i));
            }
        }
    }
    if 2 * kept.len() != z.ncols() {
        return None;
    }
    let mut out = CMatrix::zeros(z.nrows(), kept.len());
    for (c, mut v) in kept.into_iter().enumerate() {
        fix_phase(&mut v);
        out.set_column(c, &v);
    }
    Some((out, order))
}

/// `C (x; y) = (ȳ; x̄)`, the particle-hole conjugation of a Nambu vector.
fn conjugate_partner(w: &CMatrix) -> CMatrix {
    let half = w.nrows() / 2;
    let mut out = CMatrix::zeros(w.nrows(), w.ncols());
    out.rows_mut(0, half).copy_from(&w.rows(half, half).map(|x| x.conj()));
    out.rows_mut(half, half).copy_from(&w.rows(0, half).map(|x| x.conj()));
    out
}

/// Orthonormal self-conjugate (`C m = m`) basis of a `C`-invariant space,
/// built from `z + Cz` and `i(z - Cz)` in column order.
fn majorana_basis(z: &CMatrix) -> Option<CMatrix> {
    let m = z.ncols();
    let cz = conjugate_partner(z);
    let i = Complex64::new(0.0, 1.0);
    let mut basis: Vec<CVector> = Vec::with_capacity(m);
    for c in 0..m {
        for mut v in [z.column(c) + cz.column(c), (z.column(c) - cz.column(c)) * i] {
            for b in &basis {
                // a real coefficient keeps v self-conjugate
                let proj = b.dotc(&v).re;
                v -= b * Complex64::new(proj, 0.0);
            }
            let norm = v.norm();
            if norm > 1e-6 && basis.len() < m {
                basis.push(v / Complex64::new(norm, 0.0));
            }
        }
    }
    (basis.len() == m).then(|| CMatrix::from_columns(&basis))
}

/// Zero modes recombined as `(m_1 + i m_2)/√2, (m_3 + i m_4)/√2, ...` from
/// the Majorana basis.
fn majorana_pairing(z: &CMatrix) -> Result<CMatrix> {
    let basis = majorana_basis(z).ok_or_else(|| {
        Error::Spectrum(format!("zero space of dimension {} has no Majorana basis", z.ncols()))
    })?;
    let i = Complex64::new(0.0, 1.0);
    let scale = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut out = CMatrix::zeros(z.nrows(), z.ncols() / 2);
    for p in 0..z.ncols() / 2 {
        let w = (basis.column(2 * p) + basis.column(2 * p + 1) * i) * scale;
        out.set_column(p, &w);
    }
    Ok(out)
}

/// `±β` pairs read off a real Schur form of `B† K B = iA` on a Majorana
/// basis `B`.
struct SchurPairs {
    /// `(β, mode)` with `β > 0` the energy of `mode` under `K`.
    split: Vec<(f64, CVector)>,
    /// Self-conjugate vectors of the pairs with `|β| <= tol`.
    flat: Vec<CVector>,
}

fn schur_pairs(basis: &CMatrix, k: &CMatrix, tol: f64) -> SchurPairs {
    let n = k.nrows();
    let a = nalgebra::DMatrix::<f64>::from_fn(n, n, |r, c| 0.5 * (k[(r, c)].im - k[(c, r)].im));
    let (q, t) = nalgebra::linalg::Schur::new(a).unpack();
    let i = Complex64::new(0.0, 1.0);
    let real_column = |c: usize| basis * CVector::from_fn(n, |j, _| Complex64::new(q[(j, c)], 0.0));
    let mut out = SchurPairs {
        split: Vec::with_capacity(n / 2),
        flat: Vec::new(),
    };
    let mut r = 0;
    while r < n {
        if r + 1 >= n || t[(r + 1, r)] == 0.0 {
            out.flat.push(real_column(r));
            r += 1;
            continue;
        }
        let beta = 0.5 * (t[(r, r + 1)] - t[(r + 1, r)]);
        if beta.abs() <= tol {
            out.flat.push(real_column(r));
            out.flat.push(real_column(r + 1));
        } else {
            let sign = Complex64::new(beta.signum(), 0.0);
            let v = CVector::from_fn(n, |j, _| {
                (Complex64::new(q[(j, r)], 0.0) - i * sign * q[(j, r + 1)]) * std::f64::consts::FRAC_1_SQRT_2
            });
            let mut w = basis * v;
            fix_phase(&mut w);
            out.split.push((beta.abs(), w));
        }
        r += 2;
    }
    out
}

/// Rebuilds the positive members of near-zero `±E` pairs from a real Schur
/// form of the Majorana-basis Hamiltonian, so that the modes and their
/// conjugates are exactly orthogonal.
fn refine_pairs(eigen: &HermitianEigen, near: &[usize]) -> Option<Vec<(f64, CVector)>> {
    let z = columns(&eigen.vectors, near);
    let basis = majorana_basis(&z)?;
    let overlap = z.adjoint() * &basis;
    let mut weighted = overlap.clone();
    for (r, &i) in near.iter().enumerate() {
        let e = eigen.values[i];
        weighted.row_mut(r).iter_mut().for_each(|x| *x *= e);
    }
    let pairs = schur_pairs(&basis, &(overlap.adjoint() * weighted), 0.0);
    pairs.flat.is_empty().then_some(pairs.split)
}

/// Bogoliubov vacuum of `m`.
///
/// Modes are the positive-energy eigenvectors, ordered by ascending energy,
/// each with its dominant component made real positive. Exact zero modes are
/// assigned by degenerate perturbation theory in an infinitesimal field (the
/// `h -> 0` limit); if that leaves them degenerate they are paired as
/// index-ordered Majoranas, with the last pair conjugated if needed so that
/// the vacuum has even fermion parity.
pub fn ground_state(m: &BdgMatrix) -> Result<GroundState> {
    let eigen = hermitian_eigen(&m.matrix);
    let mut vac = select_vacuum(&eigen, true)?;
    if let Some(z) = vac.unresolved.take() {
        let mut pairs = majorana_pairing(&z)?;
        let mut modes = vac.modes.clone();
        modes.extend(pairs.column_iter().map(|c| (0.0, c.into_owned())));
        if GaussianState::from_stacked(stack_modes(&modes)).parity() < 0.0 {
            // conjugating one pair flips the occupation of that mode
            let last = pairs.ncols() - 1;
            let flipped = conjugate_partner(&pairs.columns(last, 1).into_owned());
            pairs.set_column(last, &flipped.column(0));
        }
        vac.modes.extend(pairs.column_iter().map(|c| (0.0, c.into_owned())));
        vac.modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let warning = vac.resolution.map(|resolution| DegeneracyWarning {
        zero_modes: vac.zero_modes,
        resolution,
        field_shift: m.field_shift,
    });
    let energies = vac.modes.iter().map(|(e, _)| *e).collect();
    let vectors: Vec<CVector> = vac.modes.into_iter().map(|(_, v)| v).collect();
    Ok(GroundState {
        state: GaussianState::from_stacked(CMatrix::from_columns(&vectors)),
        energies,
        warning,
    })
}

fn stack_modes(modes: &[(f64, CVector)]) -> CMatrix {
    let vectors: Vec<CVector> = modes.iter().map(|(_, v)| v.clone()).collect();
    CMatrix::from_columns(&vectors)
}

/// `e^{-iMt}` from one eigendecomposition of `M`, applicable at any `t`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
    sign: f64,
}

impl Propagator {
    pub fn new(m: &BdgMatrix) -> Self {
        Self::from_matrix(&m.matrix)
    }

    fn from_matrix(m: &CMatrix) -> Self {
        Self {
            eigen: hermitian_eigen(m),
            sign: 1.0,
        }
    }

    /// Flips the sign of the propagation phase. Only useful to check that the
    /// validation suite notices a broken propagator.
    #[doc(hidden)]
    pub fn corrupt_sign(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    fn prepare(&self, modes: &CMatrix) -> CMatrix {
        self.eigen.vectors.adjoint() * modes
    }

    fn apply(&self, prepared: &CMatrix, t: f64) -> CMatrix {
        phase_rotate(&self.eigen.vectors, &self.eigen.values, prepared, self.sign * t)
    }

    pub fn evolve(&self, state: &GaussianState, t: f64) -> Result<GaussianState> {
        ensure_finite("t", t)?;
        if t == 0.0 {
            return Ok(state.clone());
        }
        if state.stacked.nrows() != self.eigen.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.eigen.values.len() / 2,
                found: state.sites(),
            });
        }
        Ok(GaussianState::from_stacked(self.apply(&self.prepare(&state.stacked), t)))
    }
}

/// `e^{-iH_M t}|state⟩` up to a global phase.
pub fn evolve(state: &GaussianState, m: &BdgMatrix, t: f64) -> Result<GaussianState> {
    ensure_finite("t", t)?;
    state.check_dim(m.sites)?;
    Propagator::new(m).evolve(state, t)
}

fn log_overlap(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let ld = 0.5 * log_abs_det(&(a.adjoint() * b));
    if ld.is_nan() || ld == f64::INFINITY {
        return Err(Error::IllConditioned);
    }
    Ok(ld)
}

/// `|⟨s1|s2⟩| = |det(U₁†U₂ + V₁†V₂)|^{1/2}`, clamped to `[0, 1]`.
pub fn overlap_magnitude(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    s1.check_dim(s2.sites())?;
    Ok(log_overlap(&s1.stacked, &s2.stacked)?.exp().clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Momentum blocks for periodic chains, real space otherwise.
    #[default]
    Auto,
    RealSpace,
    /// Only valid for `Boundary::PeriodicEvenSector`.
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// One-based `(ν, μ)` indices of the decoherence factor.
    pub pair: (usize, usize),
    pub route: Route,
    #[doc(hidden)]
    pub corrupt_propagator_sign: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            pair: (1, 4),
            route: Route::Auto,
            corrupt_propagator_sign: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoSeries {
    pub params: CompassParams,
    pub coupling: CouplingSpec,
    pub pair: (usize, usize),
    pub times: Vec<f64>,
    /// `|F_νμ(t)|` at each time.
    pub values: Vec<f64>,
    pub warnings: Vec<DegeneracyWarning>,
}

impl EchoSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `|F_14(t)|` for every time in `times`.
pub fn decoherence_factor(
    params: &CompassParams,
    coupling: &CouplingSpec,
    times: &[f64],
) -> Result<EchoSeries> {
    decoherence_factor_with(params, coupling, times, &EngineOptions::default())
}

pub fn decoherence_factor_with(
    params: &CompassParams,
    coupling: &CouplingSpec,
    times: &[f64],
    options: &EngineOptions,
) -> Result<EchoSeries> {
    params.validate()?;
    ensure_finite("g", coupling.g)?;
    for &t in times {
        ensure_finite("t", t)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be sorted ascending"));
    }
    let (nu, mu) = options.pair;
    let eps_nu = coupling.epsilon(nu)?;
    let eps_mu = coupling.epsilon(mu)?;

    let mut series = EchoSeries {
        params: *params,
        coupling: *coupling,
        pair: options.pair,
        times: times.to_vec(),
        values: vec![1.0; times.len()],
        warnings: Vec::new(),
    };

    let route = match (options.route, params.boundary) {
        (Route::Momentum, Boundary::Open) => {
            return Err(invalid("route", "momentum route needs a periodic chain"))
        }
        (Route::Auto, Boundary::PeriodicEvenSector) => Route::Momentum,
        (Route::Auto, Boundary::Open) => Route::RealSpace,
        (r, _) => r,
    };

    if route == Route::Momentum {
        match MomentumEcho::new(params, eps_nu, eps_mu, options.corrupt_propagator_sign)? {
            Some(echo) => {
                if let Some(w) = echo.warning.clone() {
                    series.warnings.push(w);
                }
                if eps_nu != eps_mu {
                    series.values = times.par_iter().map(|&t| echo.magnitude(t)).collect::<Result<_>>()?;
                }
                return Ok(series);
            }
            None if options.route == Route::Momentum => {
                return Err(Error::Spectrum(
                    "zero modes not split by field in a momentum block".into(),
                ))
            }
            None => {}
        }
    }

    let ground = ground_state(&build_bdg(params, 0.0)?)?;
    series.warnings.extend(ground.warning.clone());
    if eps_nu == eps_mu {
        return Ok(series);
    }
    let mut prop_nu = Propagator::new(&build_bdg(params, eps_nu)?);
    let mut prop_mu = Propagator::new(&build_bdg(params, eps_mu)?);
    if options.corrupt_propagator_sign {
        prop_nu = prop_nu.corrupt_sign();
        prop_mu = prop_mu.corrupt_sign();
    }
    let w = ground.state.stacked();
    let (prep_nu, prep_mu) = (prop_nu.prepare(w), prop_mu.prepare(w));
    series.values = times
        .par_iter()
        .map(|&t| {
            let a = prop_mu.apply(&prep_mu, t);
            let b = prop_nu.apply(&prep_nu, t);
            Ok(log_overlap(&a, &b)?.exp().clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    Ok(series)
}

struct BlockEcho {
    prop_nu: Propagator,
    prop_mu: Propagator,
    prep_nu: CMatrix,
    prep_mu: CMatrix,
}

/// Echo of a periodic chain factorized over 4x4 momentum blocks.
struct MomentumEcho {
    blocks: Vec<BlockEcho>,
    warning: Option<DegeneracyWarning>,
}

impl MomentumEcho {
    /// `None` if some block has zero modes a field does not split.
    fn new(params: &CompassParams, eps_nu: f64, eps_mu: f64, corrupt: bool) -> Result<Option<Self>> {
        let mut blocks = Vec::new();
        let mut zero_modes = 0;
        let mut resolution = None;
        for k in momentum_grid(params.cells()) {
            debug_assert!(k > -PI && k <= PI + 1e-12);
            let vac = select_vacuum(&hermitian_eigen(&momentum_block(params, 0.0, k)), false)?;
            if vac.unresolved.is_some() {
                return Ok(None);
            }
            zero_modes += vac.zero_modes;
            resolution = resolution.max(vac.resolution);
            let modes = stack_modes(&vac.modes);
            let mut prop_nu = Propagator::from_matrix(&momentum_block(params, eps_nu, k));
            let mut prop_mu = Propagator::from_matrix(&momentum_block(params, eps_mu, k));
            if corrupt {
                prop_nu = prop_nu.corrupt_sign();
                prop_mu = prop_mu.corrupt_sign();
            }
            blocks.push(BlockEcho {
                prep_nu: prop_nu.prepare(&modes),
                prep_mu: prop_mu.prepare(&modes),
                prop_nu,
                prop_mu,
            });
        }
        let warning = resolution.map(|resolution| DegeneracyWarning {
            zero_modes,
            resolution,
            field_shift: 0.0,
        });
        Ok(Some(Self { blocks, warning }))
    }

    fn magnitude(&self, t: f64) -> Result<f64> {
        let mut log = 0.0;
        for b in &self.blocks {
            let a = b.prop_mu.apply(&b.prep_mu, t);
            let c = b.prop_nu.apply(&b.prep_nu, t);
            log += log_overlap(&a, &c)?;
        }
        Ok(log.exp().clamp(0.0, 1.0))
    }
}

/// Ground-state energy per momentum block, summed: `-½ Σ_k (E_q + E_p)`.
pub fn momentum_ground_energy(params: &CompassParams, field_shift: f64) -> Result<f64> {
    let mut total = 0.0;
    for k in momentum_grid(params.cells()) {
        let vac = select_vacuum(&hermitian_eigen(&momentum_block(params, field_shift, k)), false)?;
        total -= 0.5 * vac.modes.iter().map(|(e, _)| e).sum::<f64>();
    }
    Ok(total)
}
