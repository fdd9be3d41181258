//! Hermitian eigenproblems, ground states, reduced density matrices and
//! overlaps.

mod dense;
mod lanczos;
mod operator;
mod reduced;

pub use dense::{full_spectrum, full_spectrum_with_cap, Spectrum, DEFAULT_DENSE_CAP};
pub use lanczos::{lanczos_lowest, LanczosResult};
pub use operator::{LinearOperator, SparseHamiltonian};
pub use reduced::{overlap, partial_trace_b, renyi2, DensityMatrix};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hamiltonian::{DenseHermitianOperator, HamiltonianSpec, Part};
use crate::C64;

/// How to find the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundStateMethod {
    Dense,
    Iterative,
    /// Dense up to [`SolverOptions::auto_dense_limit`], Lanczos above.
    Auto,
}

/// Tolerances and limits shared by the eigensolvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Ground state is rejected when `E1 - E0 < degeneracy_tol * ‖H‖`.
    pub degeneracy_tol: f64,
    /// Krylov space size per Lanczos cycle.
    pub krylov_dim: usize,
    /// Explicit restarts after the first cycle.
    pub max_restarts: usize,
    /// Lanczos stops when the residual is below `residual_tol * ‖H‖`.
    pub residual_tol: f64,
    pub dense_cap: usize,
    pub auto_dense_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: 1e-10,
            krylov_dim: 160,
            max_restarts: 30,
            residual_tol: 1e-12,
            dense_cap: DEFAULT_DENSE_CAP,
            auto_dense_limit: 512,
        }
    }
}

/// Ground energy, normalised ground state and the gap to the next level.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: DVector<C64>,
    pub gap: f64,
}

/// Fixes the global phase so that the largest-magnitude component is real and
/// positive.
pub(crate) fn fix_phase(v: &mut DVector<C64>) {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::ONE);
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

fn check_gap(gap: f64, scale: f64, opts: &SolverOptions) -> Result<()> {
    let tolerance = opts.degeneracy_tol * scale.max(f64::MIN_POSITIVE);
    if gap < tolerance {
        return Err(Error::DegenerateGroundState {
            splitting: gap,
            tolerance,
        });
    }
    Ok(())
}

/// Ground state of a dense operator by full diagonalisation.
pub fn ground_state_dense(op: &DenseHermitianOperator, opts: &SolverOptions) -> Result<GroundState> {
    let spectrum = full_spectrum_with_cap(op, opts.dense_cap)?;
    let gap = spectrum.gap();
    check_gap(gap, spectrum.spectral_radius(), opts)?;
    let mut state = spectrum
        .eigenvector(0)
        .expect("dense spectrum carries eigenvectors");
    fix_phase(&mut state);
    Ok(GroundState {
        energy: spectrum.ground_energy(),
        state,
        gap,
    })
}

/// Ground state of a matrix-free operator by Lanczos, with the gap from a
/// second run deflated against the ground state.
pub fn ground_state_iterative(
    op: &dyn LinearOperator,
    opts: &SolverOptions,
) -> Result<GroundState> {
    let ground = lanczos_lowest(op, &[], opts)?;
    let mut state = ground.vector;
    fix_phase(&mut state);
    if op.dim() == 1 {
        return Ok(GroundState {
            energy: ground.value,
            state,
            gap: f64::INFINITY,
        });
    }
    let excited = lanczos_lowest(op, std::slice::from_ref(&state), opts)?;
    let gap = excited.value - ground.value;
    let scale = ground.spectral_estimate.max(excited.value.abs());
    check_gap(gap, scale, opts)?;
    Ok(GroundState {
        energy: ground.value,
        state,
        gap,
    })
}

/// Ground state of a dense operator by the chosen method.
pub fn ground_state(
    op: &DenseHermitianOperator,
    method: GroundStateMethod,
    opts: &SolverOptions,
) -> Result<GroundState> {
    match method {
        GroundStateMethod::Dense => ground_state_dense(op, opts),
        GroundStateMethod::Iterative => ground_state_iterative(op, opts),
        GroundStateMethod::Auto if op.dimension() <= opts.auto_dense_limit => {
            ground_state_dense(op, opts)
        }
        GroundStateMethod::Auto => ground_state_iterative(op, opts),
    }
}

/// Ground state of `H(λ)` for a spec, choosing dense or matrix-free by size.
pub fn spec_ground_state(
    spec: &HamiltonianSpec,
    lambda: f64,
    method: GroundStateMethod,
    opts: &SolverOptions,
) -> Result<GroundState> {
    let dim = spec.dimension()?;
    let dense = match method {
        GroundStateMethod::Dense => true,
        GroundStateMethod::Iterative => false,
        GroundStateMethod::Auto => dim <= opts.auto_dense_limit,
    };
    if dense {
        let op = crate::hamiltonian::assemble(spec, Part::Full(lambda), opts.dense_cap)?;
        ground_state_dense(&op, opts)
    } else {
        let op = SparseHamiltonian::new(spec, Part::Full(lambda))?;
        ground_state_iterative(&op, opts)
    }
}
