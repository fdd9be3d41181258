use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::{is_hermitian, Bipartition};
use crate::C64;

const NORM_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace (all within 1e-10).
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !is_hermitian(&matrix, DENSITY_TOL) {
            return Err(Error::NumericalConsistency(
                "density matrix is not Hermitian".into(),
            ));
        }
        let trace = matrix.trace();
        if (trace - C64::ONE).norm() > DENSITY_TOL {
            return Err(Error::NumericalConsistency(format!(
                "density matrix trace {trace} != 1"
            )));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &e| a.min(e));
        if min_eig < -DENSITY_TOL {
            return Err(Error::NumericalConsistency(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|` for a state in the A-major basis.
pub fn partial_trace_b(
    state: &DVector<C64>,
    bipartition: &Bipartition,
    local_dim: usize,
) -> Result<DensityMatrix> {
    let (dim_a, dim_b) = bipartition.dims(local_dim)?;
    if state.len() != dim_a * dim_b {
        return Err(Error::input(format!(
            "state of length {} does not match bipartition dimensions {dim_a} x {dim_b}",
            state.len()
        )));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::input(format!("state is not normalised: norm {norm}")));
    }
    // row-major dim_a x dim_b view of the amplitudes
    let m = DMatrix::from_row_slice(dim_a, dim_b, state.as_slice());
    Ok(DensityMatrix::from_matrix_unchecked(&m * m.adjoint()))
}

/// `(Tr ρ², S₂ = -ln Tr ρ²)` with the natural logarithm.
pub fn renyi2(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let purity = rho.purity();
    if !(purity > 0.0 && purity <= 1.0 + DENSITY_TOL) {
        return Err(Error::NumericalConsistency(format!(
            "purity {purity} outside (0, 1]"
        )));
    }
    let purity = purity.min(1.0);
    Ok((purity, -purity.ln()))
}

/// `|⟨ψ₁|ψ₂⟩|`.
pub fn overlap(psi1: &DVector<C64>, psi2: &DVector<C64>) -> Result<f64> {
    if psi1.len() != psi2.len() {
        return Err(Error::input(format!(
            "overlap of vectors with lengths {} and {}",
            psi1.len(),
            psi2.len()
        )));
    }
    Ok(psi1.dotc(psi2).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::models;
    use crate::solver::{spec_ground_state, GroundStateMethod, SolverOptions};

    fn basis(n: usize, k: usize) -> DVector<C64> {
        DVector::from_fn(n, |i, _| if i == k { C64::ONE } else { C64::ZERO })
    }

    #[test]
    fn product_state_gives_projector() {
        let bp = Bipartition::contiguous(2, 1).unwrap();
        let rho = partial_trace_b(&basis(4, 0), &bp, 2).unwrap();
        assert_eq!(rho.matrix()[(0, 0)], C64::ONE);
        assert_eq!(rho.matrix()[(1, 1)], C64::ZERO);
        let (p, s) = renyi2(&rho).unwrap();
        assert_eq!((p, s), (1.0, 0.0));
    }

    #[test]
    fn bell_pair_is_maximally_mixed() {
        let bp = Bipartition::contiguous(2, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DVector::from_vec(vec![C64::from(r), C64::ZERO, C64::ZERO, C64::from(r)]);
        let rho = partial_trace_b(&bell, &bp, 2).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(rho.matrix()[(0, 1)].norm() < 1e-15);
        let (p, s) = renyi2(&rho).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((s - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_ground_state_reduced() {
        let spec = models::two_qubit();
        let gs = spec_ground_state(&spec, 1.0, GroundStateMethod::Dense, &SolverOptions::default())
            .unwrap();
        let rho = partial_trace_b(&gs.state, spec.bipartition(), 2).unwrap();
        let t = 2.0 - 5f64.sqrt();
        let a2 = 1.0 / (1.0 + t * t);
        assert!((rho.matrix()[(0, 0)].re - a2).abs() < 1e-12);
        assert!((rho.matrix()[(1, 1)].re - (1.0 - a2)).abs() < 1e-12);
        let (p, s) = renyi2(&rho).unwrap();
        assert!((p - 0.9).abs() < 1e-12);
        assert!((s - (10.0f64 / 9.0).ln()).abs() < 1e-10);
        assert!((overlap(&basis(4, 0), &gs.state).unwrap() - a2.sqrt()).abs() < 1e-12);
        assert!((a2.sqrt() - 0.973249).abs() < 1e-6);
    }

    #[test]
    fn overlap_edge_cases() {
        let a = basis(4, 1);
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        assert_eq!(overlap(&a, &basis(4, 2)).unwrap(), 0.0);
        assert!(overlap(&a, &basis(3, 0)).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let bp = Bipartition::contiguous(2, 1).unwrap();
        assert!(partial_trace_b(&basis(8, 0), &bp, 2).is_err());
        let unnormalised = basis(4, 0) * C64::from(2.0);
        assert!(partial_trace_b(&unnormalised, &bp, 2).is_err());
        let bad = DensityMatrix::from_matrix_unchecked(DMatrix::identity(2, 2) * C64::from(2.0));
        assert!(renyi2(&bad).is_err());
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::new(DMatrix::identity(2, 2) * C64::from(0.5)).is_ok());
    }

    #[test]
    fn schmidt_symmetry_of_purity() {
        let spec = models::random_chain(5, 2, 3).unwrap();
        let gs = spec_ground_state(&spec, 1.0, GroundStateMethod::Dense, &SolverOptions::default())
            .unwrap();
        let (pa, _) = renyi2(&partial_trace_b(&gs.state, spec.bipartition(), 2).unwrap()).unwrap();
        // reorder the amplitudes into the B-major basis: transpose the dim_A x dim_B view
        let m = DMatrix::from_row_slice(4, 8, gs.state.as_slice()).transpose();
        let swapped = DVector::from_iterator(32, (0..8).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]));
        let bp_b = spec.bipartition().swapped();
        let (pb, _) = renyi2(&partial_trace_b(&swapped, &bp_b, 2).unwrap()).unwrap();
        assert!((pa - pb).abs() < 1e-10);
    }
}
