use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use serde::Serialize;

use super::check_symmetric;
use crate::error::{Error, Result};
use crate::numerics::{halving_steps, richardson_weights};

const SINGULAR_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;

fn sign_function(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(z, "Z")?;
    let eig = SymmetricEigen::new(z.clone());
    let norm = eig.eigenvalues.amax();
    let gap = eig.eigenvalues.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    if !(gap > SINGULAR_TOL * norm) {
        return Err(Error::Gapless(format!(
            "single-particle matrix is singular: min |eigenvalue| {gap:e}"
        )));
    }
    let u = &eig.eigenvectors;
    let signs = eig.eigenvalues.map(f64::signum);
    Ok(u * DMatrix::from_diagonal(&signs) * u.transpose())
}

/// `T = Z |Z|⁻¹`, the orthogonal factor of the polar decomposition.
pub fn polar_unitary(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sign_function(z)
}

/// Smallest singular value of a symmetric matrix.
pub fn min_singular_value(z: &DMatrix<f64>) -> f64 {
    z.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, e| a.min(e.abs()))
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().amax()
}

/// `‖∂T/∂λ‖₂²` at `λ = 0`, together with the many-body fidelity
/// susceptibility `-∂²ln|⟨GS(0)|GS(λ)⟩|`, which equals half of
/// `‖∂P/∂λ‖₂²` for the occupied projector `P = (1 - T)/2`, i.e. `‖∂T‖₂²/8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarSusceptibility {
    pub value: f64,
    pub error_estimate: f64,
    pub many_body: f64,
}

/// Central differences of `T(Z + λδZ)` with two Richardson levels. The first
/// step is `0.01 Δ / ‖δZ‖`.
pub fn chi_f_polar(z: &DMatrix<f64>, dz: &DMatrix<f64>) -> Result<PolarSusceptibility> {
    check_symmetric(dz, "δZ")?;
    let dz_norm = op_norm(dz);
    let gap = min_singular_value(z);
    // the sign check in polar_unitary rejects singular Z
    polar_unitary(z)?;
    if dz_norm == 0.0 {
        return Ok(PolarSusceptibility {
            value: 0.0,
            error_estimate: 0.0,
            many_body: 0.0,
        });
    }
    let steps = halving_steps(0.01 * gap / dz_norm, 2);
    let diffs = steps
        .iter()
        .map(|&h| Ok((sign_function(&(z + dz * h))? - sign_function(&(z - dz * h))?) / (2.0 * h)))
        .collect::<Result<Vec<_>>>()?;
    let combine = |from: usize| {
        let w = richardson_weights(&steps[from..], 2.0, 2.0);
        let mut d = DMatrix::zeros(z.nrows(), z.ncols());
        for (wi, di) in w.iter().zip(&diffs[from..]) {
            d += di * *wi;
        }
        d.norm_squared()
    };
    let value = combine(0);
    let previous = combine(1);
    Ok(PolarSusceptibility {
        value,
        error_estimate: (value - previous).abs(),
        many_body: value / 8.0,
    })
}

/// Both sides of `‖δT‖₂ ≤ 2‖δZ‖₂/(Δ+Δ')` and the rank form
/// `4 rank(δZ) ‖δZ‖² / (Δ+Δ')²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarBound {
    pub lhs: f64,
    pub rhs: f64,
    pub rank_bound: f64,
    pub rank: usize,
    pub gap: f64,
    pub gap_perturbed: f64,
}

impl PolarBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-9) + f64::MIN_POSITIVE
    }

    /// `lhs / rhs`; below one when the inequality holds.
    pub fn slack_ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

pub fn polar_bound_check(z: &DMatrix<f64>, dz: &DMatrix<f64>) -> Result<PolarBound> {
    check_symmetric(dz, "δZ")?;
    let zp = z + dz;
    let lhs = (polar_unitary(&zp)? - polar_unitary(z)?).norm();
    let gap = min_singular_value(z);
    let gap_perturbed = min_singular_value(&zp);
    let singular = dz.clone().symmetric_eigenvalues().map(f64::abs);
    let dz_op = singular.max();
    let rank = singular.iter().filter(|&&s| s > RANK_TOL * dz_op).count();
    let sum = gap + gap_perturbed;
    Ok(PolarBound {
        lhs,
        rhs: 2.0 * dz.norm() / sum,
        rank_bound: 4.0 / (sum * sum) * rank as f64 * dz_op * dz_op,
        rank,
        gap,
        gap_perturbed,
    })
}
