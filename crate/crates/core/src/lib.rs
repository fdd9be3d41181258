//! Entanglement susceptibility, fidelity susceptibility and Renyi-2 entropy of
//! bipartitioned quantum lattice models.
//!
//! The crate is organised bottom-up:
//!
//! * [`hamiltonian`]: local lattice Hamiltonians, bipartitions, the
//!   bulk/boundary split `H(λ) = H_A + H_B + λ H_∂` and dense assembly.
//! * [`solver`]: Hermitian eigensolvers (dense and Lanczos), partial traces,
//!   purity and overlaps.
//! * [`susceptibility`]: `χ_E`, `χ_F`, the bound chain, finite-difference
//!   cross-checks, the doubled/twisted swap identity and imaginary-time
//!   cumulants.
//! * [`fermion`] and [`boson`]: quadratic models, where the same quantities
//!   reduce to single-particle linear algebra.
//! * [`harness`]: configuration, sweeps, CSV/JSON output and the `verify`
//!   property run behind the `entsus` CLI.

pub mod boson;
pub mod error;
pub mod fermion;
pub mod hamiltonian;
pub mod harness;
pub mod numerics;
pub mod solver;
pub mod susceptibility;

pub use error::{Error, Result};

/// Complex scalar used for all many-body amplitudes.
pub type C64 = num_complex::Complex64;
