//! Decoherence and quantum-correlation dynamics of two central qubits coupled
//! to a one-dimensional general quantum compass chain.
//!
//! The environment is mapped onto free fermions with a Jordan-Wigner
//! transformation. Decoherence factors are Loschmidt echoes between
//! Bogoliubov vacua evolved under field-shifted Hamiltonians, evaluated
//! exactly in real space or per momentum block. A dense exact-diagonalization
//! [`oracle`] covers small chains and is the reference every fast path is
//! checked against.
//!
//! Module map:
//!
//! - [`model`]: parameters, closed-form dispersion, Nambu (BdG) matrices.
//! - [`fermion`]: Gaussian states, exact propagation, vacuum overlaps, echoes.
//! - [`oracle`]: dense spin-space simulator for `N <= 14`.
//! - [`measures`]: X-state assembly, concurrence, EoF, discord, negativity.
//! - [`analysis`]: relaxation times, scaling fits, revival periods.

pub mod analysis;
pub mod error;
pub mod fermion;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use fermion::{
    decoherence_factor, decoherence_factor_with, evolve, ground_state, overlap_magnitude,
    CouplingSpec, DegeneracyWarning, EchoSeries, EngineOptions, GaussianState, Route,
};
pub use measures::{InitialXState, QcRecord, XState};
pub use model::{build_bdg, dispersion, spectral_gap, BdgMatrix, Boundary, CompassParams};
