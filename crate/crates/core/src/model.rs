//! The compass-chain environment: parameters, closed-form quasiparticle
//! dispersion, and the Nambu matrix of the Jordan-Wigner fermionized chain.
//!
//! The chain Hamiltonian is
//!
//! ```text
//! H_E = Σ_i [ J_o σ̃⁺_{2i-1} σ̃⁺_{2i} + J_e σ̃⁻_{2i} σ̃⁻_{2i+1} + h (σᶻ_{2i-1} + σᶻ_{2i}) ]
//! ```
//!
//! with pseudo-spins `σ̃^± = cos(θ/2) σˣ ± sin(θ/2) σʸ`: odd and even bonds
//! couple spin components along axes at `±θ/2` from `x`, so `θ` is the
//! opening angle between the two bond axes. `θ = 0` is the bond-alternating
//! Ising chain and `θ = π/2` at `h = 0` is the quantum compass chain. With
//! this convention the quasiparticle gap closes on `cos θ = h / √(J_o J_e)`.
//!
//! After Jordan-Wigner (`σᶻ = 2n - 1`) a bond between sites `j, j+1` whose
//! axis sits at angle `φ` becomes
//! `J (c†_j c_{j+1} + e^{-2iφ} c†_j c†_{j+1} + h.c.)`. The Nambu matrix `M`
//! uses the ordering `Ψ = (c_1..c_N, c†_1..c†_N)` and `H = ½ Ψ† M Ψ + const`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::linalg::{hermitian_eigen, max_abs, CMatrix, ZERO};

pub const MIN_SITES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The `i = N'` even bond is dropped entirely.
    Open,
    /// Ring closed in the even fermion-parity sector, i.e. antiperiodic
    /// boundary conditions for the Jordan-Wigner fermions.
    #[serde(alias = "periodic")]
    PeriodicEvenSector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompassParams {
    pub j_odd: f64,
    pub j_even: f64,
    pub theta: f64,
    pub field: f64,
    pub sites: usize,
    pub boundary: Boundary,
}

impl CompassParams {
    pub fn new(
        j_odd: f64,
        j_even: f64,
        theta: f64,
        field: f64,
        sites: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        let params = Self {
            j_odd,
            j_even,
            theta,
            field,
            sites,
            boundary,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("J_o", self.j_odd)?;
        ensure_finite("J_e", self.j_even)?;
        ensure_finite("theta", self.theta)?;
        ensure_finite("h", self.field)?;
        if self.j_odd <= 0.0 {
            return Err(invalid("J_o", format!("must be positive, got {}", self.j_odd)));
        }
        if self.j_even <= 0.0 {
            return Err(invalid("J_e", format!("must be positive, got {}", self.j_even)));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(invalid("theta", format!("must lie in [0, pi], got {}", self.theta)));
        }
        if self.sites < MIN_SITES || self.sites % 2 != 0 {
            return Err(invalid(
                "N",
                format!("must be even and >= {MIN_SITES}, got {}", self.sites),
            ));
        }
        Ok(())
    }

    /// Number of two-site unit cells, `N' = N / 2`.
    pub fn cells(&self) -> usize {
        self.sites / 2
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_field(mut self, field: f64) -> Self {
        self.field = field;
        self
    }

    pub fn with_sites(mut self, sites: usize) -> Self {
        self.sites = sites;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// The anisotropy `|J_e - J_o|` used as the gap scaling variable.
    pub fn anisotropy(&self) -> f64 {
        (self.j_even - self.j_odd).abs()
    }

    /// Coupling and pseudo-spin axis angle of the bond starting at 0-based
    /// site `left`.
    fn bond_parameters(&self, left: usize) -> (f64, f64) {
        if left % 2 == 0 {
            (self.j_odd, 0.5 * self.theta)
        } else {
            (self.j_even, -0.5 * self.theta)
        }
    }

    /// Fermionic bond terms in real space, wrap-around bond included for the
    /// periodic chain with its even-parity sign.
    pub fn bonds(&self) -> Vec<BondTerm> {
        let n = self.sites;
        let count = match self.boundary {
            Boundary::Open => n - 1,
            Boundary::PeriodicEvenSector => n,
        };
        (0..count)
            .map(|left| {
                let (coupling, axis) = self.bond_parameters(left);
                let mut term = BondTerm::from_axis(left, (left + 1) % n, coupling, axis);
                if left == n - 1 {
                    term.hopping = -term.hopping;
                    term.pairing = -term.pairing;
                }
                term
            })
            .collect()
    }
}

/// `hopping c†_left c_right + pairing c†_left c†_right + h.c.`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondTerm {
    pub left: usize,
    pub right: usize,
    pub hopping: Complex64,
    pub pairing: Complex64,
}

impl BondTerm {
    fn from_axis(left: usize, right: usize, coupling: f64, axis: f64) -> Self {
        Self {
            left,
            right,
            hopping: Complex64::new(coupling, 0.0),
            pairing: Complex64::from_polar(coupling, -2.0 * axis),
        }
    }
}

/// Closed-form quasiparticle energies at one momentum of the two-site cell.
///
/// `hopping` and `pairing` are the cell form factors
/// `L = (J_o + J_e e^{ik}) / 4` and `J = (J_o e^{iθ} - J_e e^{i(k-θ)}) / 4`;
/// `pairing_reflected` is `J` evaluated at `-k`. The branches satisfy
/// `E² = a ± √b`; the lower one is evaluated as `(a² - b) / (a + √b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub hopping: Complex64,
    pub pairing: Complex64,
    pub pairing_reflected: Complex64,
    pub a: f64,
    pub b: f64,
    pub e_upper: f64,
    pub e_lower: f64,
}

fn form_factors(params: &CompassParams, k: f64) -> (Complex64, Complex64) {
    let l = (params.j_odd + params.j_even * Complex64::from_polar(1.0, k)) / 4.0;
    let j = (params.j_odd * Complex64::from_polar(1.0, params.theta)
        - params.j_even * Complex64::from_polar(1.0, k - params.theta))
        / 4.0;
    (l, j)
}

pub fn dispersion(params: &CompassParams, k: f64) -> Result<DispersionPoint> {
    params.validate()?;
    ensure_finite("k", k)?;
    if !(k > -PI - 1e-12 && k <= PI + 1e-12) {
        return Err(invalid("k", format!("must lie in (-pi, pi], got {k}")));
    }
    let (l, j) = form_factors(params, k);
    let (_, j_reflected) = form_factors(params, -k);

    // Entries of the 4x4 Nambu block in the fermion normalization:
    // intra-cell hopping, pairing at k, and the conjugate-partner pairing.
    let mu = 2.0 * params.field;
    let hop = 4.0 * l.conj();
    let p = 4.0 * j.conj();
    let q = -4.0 * j_reflected.conj();

    let mu2 = mu * mu;
    let hop2 = hop.norm_sqr();
    let (p2, q2) = (p.norm_sqr(), q.norm_sqr());
    let a = mu2 + hop2 + 0.5 * (p2 + q2);
    let cross = (hop * hop * q * p.conj()).re;
    let b_raw = 4.0 * mu2 * hop2 + hop2 * (p2 + q2) + 0.25 * (p2 - q2).powi(2) - 2.0 * cross;

    let tol = 1e-12 * a.max(1.0);
    let b = clamp_roundoff("b", b_raw, tol * a.max(1.0))?;
    let root = b.sqrt();
    let upper_sq = a + root;
    // E_upper² E_lower² = a² - b, written without the large cancellation
    let product = (hop * hop + p * q.conj()).norm_sqr() + mu2 * (mu2 - 2.0 * hop2 + p2 + q2);
    let product = clamp_roundoff("a^2 - b", product, tol * a.max(1.0))?;
    let lower_sq = if upper_sq > 0.0 { product / upper_sq } else { 0.0 };

    Ok(DispersionPoint {
        k,
        hopping: l,
        pairing: j,
        pairing_reflected: j_reflected,
        a,
        b,
        e_upper: upper_sq.sqrt(),
        e_lower: lower_sq.sqrt(),
    })
}

fn clamp_roundoff(name: &'static str, value: f64, tol: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tol {
        Ok(0.0)
    } else {
        Err(invalid(name, format!("negative beyond roundoff: {value:e}")))
    }
}

/// Cell momenta `k = (2m + 1) π / N'` of the antiperiodic sector, folded into
/// `(-π, π]` and sorted ascending.
pub fn momentum_grid(cells: usize) -> Vec<f64> {
    let mut ks: Vec<f64> = (0..cells)
        .map(|m| {
            let k = PI * (2 * m + 1) as f64 / cells as f64;
            if k > PI + 1e-12 {
                k - 2.0 * PI
            } else {
                k
            }
        })
        .collect();
    ks.sort_by(f64::total_cmp);
    ks
}

/// Single-particle Nambu matrix of the fermionized chain.
#[derive(Debug, Clone)]
pub struct BdgMatrix {
    pub matrix: CMatrix,
    pub sites: usize,
    /// The field shift `ε_μ` added to `h`.
    pub field_shift: f64,
    /// Scalar left over from normal ordering: `H = ½ Ψ† M Ψ + constant`.
    pub constant: f64,
}

impl BdgMatrix {
    pub fn dim(&self) -> usize {
        2 * self.sites
    }

    /// Largest entry of `M - M†`, relative to the largest entry of `M`.
    pub fn hermiticity_residual(&self) -> f64 {
        let scale = max_abs(&self.matrix).max(1.0);
        max_abs(&(&self.matrix - self.matrix.adjoint())) / scale
    }

    /// Residuals of the particle-hole structure
    /// `M = [[A, B], [-B̄, -Ā]]` with `B` antisymmetric.
    pub fn particle_hole_residual(&self) -> f64 {
        let n = self.sites;
        let a = self.matrix.view((0, 0), (n, n));
        let b = self.matrix.view((0, n), (n, n));
        let c = self.matrix.view((n, 0), (n, n));
        let d = self.matrix.view((n, n), (n, n));
        let scale = max_abs(&self.matrix).max(1.0);
        let r1 = max_abs(&(d.into_owned() + a.conjugate()));
        let r2 = max_abs(&(c.into_owned() + b.conjugate()));
        let r3 = max_abs(&(b.into_owned() + b.transpose()));
        r1.max(r2).max(r3) / scale
    }

    /// All `2N` eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).values
    }

    /// The `N` non-negative quasiparticle energies, ascending.
    pub fn quasiparticle_energies(&self) -> Vec<f64> {
        let values = self.eigenvalues();
        values[self.sites..].to_vec()
    }
}

pub fn build_bdg(params: &CompassParams, field_shift: f64) -> Result<BdgMatrix> {
    params.validate()?;
    ensure_finite("field_shift", field_shift)?;
    let n = params.sites;
    let field = params.field + field_shift;

    let mut a = CMatrix::zeros(n, n);
    let mut b = CMatrix::zeros(n, n);
    for bond in params.bonds() {
        let (l, r) = (bond.left, bond.right);
        a[(l, r)] += bond.hopping;
        a[(r, l)] += bond.hopping.conj();
        b[(l, r)] += bond.pairing;
        b[(r, l)] -= bond.pairing;
    }
    for i in 0..n {
        a[(i, i)] += Complex64::new(2.0 * field, 0.0);
    }

    let mut m = DMatrix::from_element(2 * n, 2 * n, ZERO);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&b);
    m.view_mut((n, 0), (n, n)).copy_from(&(-b.conjugate()));
    m.view_mut((n, n), (n, n)).copy_from(&(-a.conjugate()));

    // h Σ σᶻ = Σ 2h n_j - hN, and c†Ac = ½ Ψ†[A ⊕ -Ā]Ψ + ½ tr A.
    let constant = 0.5 * a.trace().re - field * n as f64;

    Ok(BdgMatrix {
        matrix: m,
        sites: n,
        field_shift,
        constant,
    })
}

/// 4x4 Nambu block of the periodic chain at cell momentum `k`, in the basis
/// `(c_{k,1}, c_{k,2}, c†_{-k,1}, c†_{-k,2})` with `c_{n,s} = N'^{-1/2} Σ_k e^{ikn} c_{k,s}`.
pub fn momentum_block(params: &CompassParams, field_shift: f64, k: f64) -> CMatrix {
    let (j_o, axis_o) = params.bond_parameters(0);
    let (j_e, axis_e) = params.bond_parameters(1);
    let odd = BondTerm::from_axis(0, 1, j_o, axis_o);
    let even = BondTerm::from_axis(1, 2, j_e, axis_e);
    let mu = Complex64::new(2.0 * (params.field + field_shift), 0.0);

    let hop = |k: f64| odd.hopping + even.hopping.conj() * Complex64::from_polar(1.0, -k);
    let pair = |k: f64| odd.pairing - even.pairing * Complex64::from_polar(1.0, -k);

    let normal = |k: f64| CMatrix::from_row_slice(2, 2, &[mu, hop(k), hop(k).conj(), mu]);
    let anomalous = CMatrix::from_row_slice(2, 2, &[ZERO, pair(k), -pair(-k), ZERO]);

    let mut m = CMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&normal(k));
    m.view_mut((0, 2), (2, 2)).copy_from(&anomalous);
    m.view_mut((2, 0), (2, 2)).copy_from(&anomalous.adjoint());
    m.view_mut((2, 2), (2, 2)).copy_from(&(-normal(-k).transpose()));
    m
}

/// Quasiparticle gap above the ground manifold on the antiperiodic grid.
///
/// This is the minimum of the lower branch `E_p`. When that branch is pinned
/// at zero for every momentum (the flat zero-mode band of the compass point
/// `θ = π/2, h = 0`), those modes belong to the degenerate ground manifold and
/// the gap is taken from the upper branch instead.
pub fn spectral_gap(params: &CompassParams) -> Result<f64> {
    params.validate()?;
    let points = momentum_grid(params.cells())
        .into_iter()
        .map(|k| dispersion(params, k))
        .collect::<Result<Vec<_>>>()?;
    let flat_tol = 1e-6 * (params.j_odd + params.j_even);
    let lower_max = points.iter().map(|p| p.e_lower).fold(0.0, f64::max);
    let gap = if lower_max <= flat_tol {
        points.iter().map(|p| p.e_upper).fold(f64::INFINITY, f64::min)
    } else {
        points.iter().map(|p| p.e_lower).fold(f64::INFINITY, f64::min)
    };
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn params(j_e: f64, theta: f64, h: f64, n: usize, boundary: Boundary) -> CompassParams {
        CompassParams::new(1.0, j_e, theta, h, n, boundary).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(CompassParams::new(1.0, 4.0, 0.3, 0.0, 6, Boundary::Open).is_ok());
        assert!(CompassParams::new(1.0, 4.0, 0.3, 0.0, 5, Boundary::Open).is_err());
        assert!(CompassParams::new(1.0, 4.0, 0.3, 0.0, 2, Boundary::Open).is_err());
        assert!(CompassParams::new(-1.0, 4.0, 0.3, 0.0, 6, Boundary::Open).is_err());
        assert!(CompassParams::new(1.0, 0.0, 0.3, 0.0, 6, Boundary::Open).is_err());
        assert!(CompassParams::new(1.0, 4.0, 3.5, 0.0, 6, Boundary::Open).is_err());
        assert!(CompassParams::new(1.0, 4.0, f64::NAN, 0.0, 6, Boundary::Open).is_err());
    }

    #[test]
    fn isotropic_compass_point_closes_at_zone_boundary() {
        let p = params(1.0, FRAC_PI_2, 0.0, 8, Boundary::PeriodicEvenSector);
        let d = dispersion(&p, PI).unwrap();
        assert!(d.hopping.norm() < 1e-15);
        assert!(d.pairing.norm() < 1e-15);
        assert!(d.e_upper < 1e-7 && d.e_lower < 1e-7);
    }

    #[test]
    fn anisotropic_compass_point_at_zone_boundary() {
        let p = params(4.0, FRAC_PI_2, 0.0, 8, Boundary::PeriodicEvenSector);
        let d = dispersion(&p, PI).unwrap();
        assert!((d.hopping.norm() - 0.75).abs() < 1e-14);
        assert!((d.pairing.norm() - 0.75).abs() < 1e-14);
        // Upper branch 2|J_o - J_e e^{ik}|, lower branch is the flat zero band.
        assert!((d.e_upper - 6.0).abs() < 1e-12);
        assert!(d.e_lower < 1e-6);
    }

    #[test]
    fn dispersion_rejects_bad_momentum() {
        let p = params(4.0, 1.0, 0.2, 8, Boundary::Open);
        assert!(dispersion(&p, f64::INFINITY).is_err());
        assert!(dispersion(&p, 4.0).is_err());
    }

    #[test]
    fn field_shift_only_touches_diagonal() {
        let p = params(3.0, 1.1, 0.3, 8, Boundary::PeriodicEvenSector);
        let m0 = build_bdg(&p, 0.0).unwrap();
        let m1 = build_bdg(&p, 0.1).unwrap();
        let diff = &m1.matrix - &m0.matrix;
        for i in 0..16 {
            for j in 0..16 {
                let expected = if i == j {
                    if i < 8 {
                        0.2
                    } else {
                        -0.2
                    }
                } else {
                    0.0
                };
                assert!((diff[(i, j)] - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bdg_structure_and_constant() {
        for boundary in [Boundary::Open, Boundary::PeriodicEvenSector] {
            let m = build_bdg(&params(2.5, 0.7, 0.4, 10, boundary), -0.1).unwrap();
            assert!(m.hermiticity_residual() < 1e-12);
            assert!(m.particle_hole_residual() < 1e-12);
            assert!(m.constant.abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_grid_is_antiperiodic() {
        let ks = momentum_grid(4);
        let expected = [-3.0 * PI / 4.0, -PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
        for (k, e) in ks.iter().zip(expected) {
            assert!((k - e).abs() < 1e-15);
        }
        // odd cell count contains the zone boundary
        assert!(momentum_grid(3).iter().any(|&k| (k - PI).abs() < 1e-12));
    }

    #[test]
    fn momentum_block_matches_closed_form() {
        let p = params(4.0, PI / 3.0, 0.5, 8, Boundary::PeriodicEvenSector);
        let k = 0.7;
        let block = momentum_block(&p, 0.0, k);
        let values = hermitian_eigen(&block).values;
        let d = dispersion(&p, k).unwrap();
        let expected = [-d.e_upper, -d.e_lower, d.e_lower, d.e_upper];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
    }

    #[test]
    fn flat_band_gap_uses_upper_branch() {
        let p = params(4.0, FRAC_PI_2, 0.0, 400, Boundary::PeriodicEvenSector);
        let gap = spectral_gap(&p).unwrap();
        assert!((gap / 3.0 - 2.0).abs() < 1e-3);
        let iso = params(1.0, FRAC_PI_2, 0.0, 400, Boundary::PeriodicEvenSector);
        // closes at k = π, which the grid misses by half a step
        let dk = 2.0 * PI / iso.cells() as f64;
        assert!(spectral_gap(&iso).unwrap() < 2.0 * dk);
    }
}
