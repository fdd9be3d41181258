use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::DenseHermitianOperator;
use crate::C64;

/// Default cap for full dense diagonalisation.
pub const DEFAULT_DENSE_CAP: usize = 1 << 12;

/// Eigenvalues in ascending order with (optionally) their eigenvectors as
/// columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DMatrix<C64>>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&DMatrix<C64>> {
        self.eigenvectors.as_ref()
    }

    pub fn eigenvector(&self, k: usize) -> Option<DVector<C64>> {
        self.eigenvectors.as_ref().map(|u| u.column(k).into_owned())
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `E1 - E0`; infinite for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        match self.eigenvalues.get(1) {
            Some(e1) => e1 - self.eigenvalues[0],
            None => f64::INFINITY,
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .first()
            .unwrap()
            .abs()
            .max(self.eigenvalues.last().unwrap().abs())
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn full_spectrum(op: &DenseHermitianOperator) -> Result<Spectrum> {
    full_spectrum_with_cap(op, DEFAULT_DENSE_CAP)
}

/// Full eigendecomposition. Real symmetric input takes the real solver.
pub fn full_spectrum_with_cap(op: &DenseHermitianOperator, cap: usize) -> Result<Spectrum> {
    let n = op.dimension();
    if n > cap {
        return Err(Error::Capacity { dimension: n, cap });
    }
    let m = op.matrix();
    let (values, vectors) = if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let eig = SymmetricEigen::new(real);
        (eig.eigenvalues, eig.eigenvectors.map(C64::from))
    } else {
        let eig = SymmetricEigen::new(m.clone());
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::NumericalConsistency(
            "non-finite eigenvalue".to_string(),
        ));
    }
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::max_abs;

    fn reconstruction_residual(op: &DenseHermitianOperator, s: &Spectrum) -> f64 {
        let u = s.eigenvectors().unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            s.dimension(),
            s.eigenvalues().iter().map(|&e| C64::from(e)),
        ));
        max_abs(&(op.matrix() - u * d * u.adjoint()))
    }

    #[test]
    fn diagonal_is_sorted() {
        let op = DenseHermitianOperator::from_real(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0])
            .unwrap();
        let s = full_spectrum(&op).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 2.0, 3.0]);
        assert!((s.gap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_block() {
        let op = DenseHermitianOperator::from_real(2, &[-2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = full_spectrum(&op).unwrap();
        let r5 = 5f64.sqrt();
        assert!((s.eigenvalues()[0] + r5).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - r5).abs() < 1e-14);
        assert!(reconstruction_residual(&op, &s) <= 1e-9 * op.max_abs());
    }

    #[test]
    fn pauli_x_and_y() {
        let x = DenseHermitianOperator::new(crate::hamiltonian::pauli::x()).unwrap();
        assert_eq!(full_spectrum(&x).unwrap().eigenvalues(), &[-1.0, 1.0]);
        let y = DenseHermitianOperator::new(crate::hamiltonian::pauli::y()).unwrap();
        let s = full_spectrum(&y).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!(reconstruction_residual(&y, &s) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_oversized() {
        assert!(DenseHermitianOperator::from_real(2, &[0.0, 1.0, 0.0, 0.0]).is_err());
        let op = DenseHermitianOperator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            full_spectrum_with_cap(&op, 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn random_complex_hermitian_reconstructs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 24;
        let a = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let op = DenseHermitianOperator::new(&a + a.adjoint()).unwrap();
        let s = full_spectrum(&op).unwrap();
        assert!(reconstruction_residual(&op, &s) <= 1e-9 * op.max_abs());
        let u = s.eigenvectors().unwrap();
        let gram = u.adjoint() * u - DMatrix::<C64>::identity(n, n);
        assert!(max_abs(&gram) <= 1e-10);
        assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }
}
