use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use super::check_symmetric;
use super::polar::polar_unitary;
use crate::error::{Error, Result};

const CLAMP_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-8;

/// Projector onto the negative eigenspace of `Z`, i.e. `⟨c_i† c_j⟩` in the
/// ground state.
pub fn ground_projector(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let t = polar_unitary(z)?;
    Ok((DMatrix::identity(z.nrows(), z.ncols()) - t) * 0.5)
}

/// `S₂ = -Σ ln(ν² + (1-ν)²)` over the eigenvalues of the correlation matrix
/// restricted to `region_a`.
pub fn corr_matrix_renyi2(z: &DMatrix<f64>, region_a: &[usize]) -> Result<f64> {
    check_symmetric(z, "Z")?;
    if region_a.iter().any(|&i| i >= z.nrows()) {
        return Err(Error::input("region index out of range"));
    }
    let p = ground_projector(z)?;
    let ca = DMatrix::from_fn(region_a.len(), region_a.len(), |i, j| {
        p[(region_a[i], region_a[j])]
    });
    let nu = SymmetricEigen::new(ca).eigenvalues;
    let mut s2 = 0.0;
    for &v in nu.iter() {
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
            return Err(Error::NumericalConsistency(format!(
                "correlation eigenvalue {v} outside [0, 1]"
            )));
        }
        let v = if v < CLAMP_TOL {
            0.0
        } else if v > 1.0 - CLAMP_TOL {
            1.0
        } else {
            v
        };
        s2 -= (v * v + (1.0 - v) * (1.0 - v)).ln();
    }
    Ok(s2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bond_is_one_bit() {
        let z = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((corr_matrix_renyi2(&z, &[0]).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn decoupled_blocks_are_unentangled() {
        let z = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.3, 0.0, 0.0, //
                0.0, 0.0, -0.5, 2.0, //
                0.0, 0.0, 2.0, 0.1,
            ],
        );
        assert!(corr_matrix_renyi2(&z, &[0, 1]).unwrap().abs() < 1e-12);
    }
}
