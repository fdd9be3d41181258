//! Quadratic fermion models `H = Σ Z_ij c_i† c_j`: polar-decomposition
//! fidelity susceptibility and its bound, Fock-space and correlation-matrix
//! oracles, and the tight-binding momentum sums.

mod correlation;
mod fock;
mod polar;
mod tight_binding;

pub use correlation::{corr_matrix_renyi2, ground_projector};
pub use fock::{fock_ground_state, fock_reduced_purity, slater_overlap, FockGroundState, MAX_FOCK_MODES};
pub use polar::{
    chi_f_polar, min_singular_value, polar_bound_check, polar_unitary, PolarBound,
    PolarSusceptibility,
};
pub use tight_binding::{
    scaling_fit, tight_binding_chi_e, xi_profile, Filling, ScalingFitResult, TightBindingResult,
    TightBindingSpec, ZERO_MODE_TOL,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// `Z + λ δZ` on modes split into A and B, with `δZ` confined to the rows and
/// columns of `boundary`.
#[derive(Debug, Clone)]
pub struct QuadraticFermionModel {
    z: DMatrix<f64>,
    dz: DMatrix<f64>,
    region_a: Vec<usize>,
    boundary: Vec<usize>,
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!("{name} is not square")));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > SYMMETRY_TOL * scale {
        return Err(Error::input(format!("{name} is not symmetric")));
    }
    Ok(())
}

impl QuadraticFermionModel {
    pub fn new(
        z: DMatrix<f64>,
        dz: DMatrix<f64>,
        region_a: Vec<usize>,
        boundary: Vec<usize>,
    ) -> Result<Self> {
        check_symmetric(&z, "Z")?;
        check_symmetric(&dz, "δZ")?;
        let n = z.nrows();
        if dz.shape() != z.shape() {
            return Err(Error::input("Z and δZ differ in shape"));
        }
        if region_a.is_empty() || region_a.len() >= n || region_a.iter().any(|&i| i >= n) {
            return Err(Error::input("region A must be a proper nonempty subset of the modes"));
        }
        if boundary.iter().any(|&i| i >= n) {
            return Err(Error::input("boundary index out of range"));
        }
        let mut on_boundary = vec![false; n];
        boundary.iter().for_each(|&i| on_boundary[i] = true);
        for i in 0..n {
            for j in 0..n {
                if dz[(i, j)] != 0.0 && !(on_boundary[i] && on_boundary[j]) {
                    return Err(Error::input(format!(
                        "δZ entry ({i},{j}) lies outside the boundary block"
                    )));
                }
            }
        }
        Ok(Self {
            z,
            dz,
            region_a,
            boundary,
        })
    }

    /// Open chain with hoppings `-t1` on bonds `(2i, 2i+1)` and `-t2` on
    /// `(2i+1, 2i+2)`, cut at the weak bond `(L/2-1, L/2)`, which becomes `δZ`.
    /// `L/2` must be even so that both halves end on strong bonds.
    pub fn dimerized_chain(len: usize, t1: f64, t2: f64) -> Result<Self> {
        if len < 4 || len % 4 != 0 {
            return Err(Error::input(format!("dimerized chain length {len} must be a multiple of 4")));
        }
        let half = len / 2;
        let mut z = DMatrix::zeros(len, len);
        let mut dz = DMatrix::zeros(len, len);
        for i in 0..len - 1 {
            let t = if i % 2 == 0 { t1 } else { t2 };
            let target = if i == half - 1 { &mut dz } else { &mut z };
            target[(i, i + 1)] = -t;
            target[(i + 1, i)] = -t;
        }
        Self::new(z, dz, (0..half).collect(), vec![half - 1, half])
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn dz(&self) -> &DMatrix<f64> {
        &self.dz
    }

    pub fn region_a(&self) -> &[usize] {
        &self.region_a
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn num_modes(&self) -> usize {
        self.z.nrows()
    }

    /// `Z + λ δZ`.
    pub fn at(&self, lambda: f64) -> DMatrix<f64> {
        &self.z + &self.dz * lambda
    }
}
