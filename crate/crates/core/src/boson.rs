//! Harmonic lattices `H = ½ Σ p_i² + ½ Σ V_ij x_i x_j` (unit masses, `ħ = 1`).
//!
//! The ground state is the Gaussian `ψ_W(x) ∝ exp(-xᵀ W x / 2)` with
//! `W = V^{1/2}`, so fidelities and susceptibilities reduce to functions of
//! `W`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{halving_steps, pairwise_sum, richardson};

const STABILITY_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// `V + λ δV` with `V` and `V + δV` positive definite, hence positive on the
/// whole segment `λ ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct BosonModel {
    v: DMatrix<f64>,
    dv: DMatrix<f64>,
}

/// `Γ = Γ_x ⊕ Γ_p` for the ground state of `V`.
#[derive(Debug, Clone)]
pub struct BosonCovariance {
    pub gamma_x: DMatrix<f64>,
    pub gamma_p: DMatrix<f64>,
    /// `2 λ_min(V^{1/2})`.
    pub gap: f64,
}

impl BosonCovariance {
    /// The `2N × 2N` block-diagonal matrix.
    pub fn full(&self) -> DMatrix<f64> {
        let n = self.gamma_x.nrows();
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&self.gamma_x);
        g.view_mut((n, n), (n, n)).copy_from(&self.gamma_p);
        g
    }
}

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!("{name} is not square")));
    }
    if (m - m.transpose()).amax() > SYMMETRY_TOL * m.amax().max(1.0) {
        return Err(Error::input(format!("{name} is not symmetric")));
    }
    Ok(())
}

/// Eigendecomposition of a positive-definite `V`, or a stability error.
fn positive_eigen(v: &DMatrix<f64>, name: &str) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_symmetric(v, name)?;
    let eig = SymmetricEigen::new(v.clone());
    let norm = eig.eigenvalues.amax();
    let min = eig.eigenvalues.min();
    if !(min > STABILITY_TOL * norm) {
        return Err(Error::Stability(format!(
            "{name} is not positive definite: min eigenvalue {min:e}"
        )));
    }
    Ok(eig)
}

fn matrix_power(eig: &SymmetricEigen<f64, nalgebra::Dyn>, power: f64) -> DMatrix<f64> {
    let u = &eig.eigenvectors;
    u * DMatrix::from_diagonal(&eig.eigenvalues.map(|e| e.powf(power))) * u.transpose()
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().amax()
}

impl BosonModel {
    pub fn new(v: DMatrix<f64>, dv: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&dv, "δV")?;
        if v.shape() != dv.shape() {
            return Err(Error::input("V and δV differ in shape"));
        }
        positive_eigen(&v, "V")?;
        positive_eigen(&(&v + &dv), "V + δV")?;
        Ok(Self { v, dv })
    }

    /// Chain of `len` unit masses between fixed walls with springs `k` and
    /// on-site pinning `m²`. `V = (m² + 2k) I - k A`, and `δV` is the
    /// off-diagonal coupling `-k` across the middle bond `(len/2 - 1, len/2)`;
    /// the on-site part of that spring stays in `V`.
    pub fn pinned_chain(len: usize, spring: f64, mass_sq: f64) -> Result<Self> {
        if len < 2 || len % 2 != 0 {
            return Err(Error::input(format!("chain length {len} must be even")));
        }
        if !(spring > 0.0) || !(mass_sq >= 0.0) {
            return Err(Error::input("spring must be positive and m² non-negative"));
        }
        let half = len / 2;
        let mut v = DMatrix::from_diagonal_element(len, len, mass_sq + 2.0 * spring);
        let mut dv = DMatrix::zeros(len, len);
        for i in 0..len - 1 {
            let target = if i == half - 1 { &mut dv } else { &mut v };
            target[(i, i + 1)] = -spring;
            target[(i + 1, i)] = -spring;
        }
        Self::new(v, dv)
    }

    /// The gapless limit `m² = 0`: the gap closes like `1/len`.
    pub fn unpinned_chain(len: usize, spring: f64) -> Result<Self> {
        Self::pinned_chain(len, spring, 0.0)
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn dv(&self) -> &DMatrix<f64> {
        &self.dv
    }

    pub fn num_modes(&self) -> usize {
        self.v.nrows()
    }

    pub fn at(&self, lambda: f64) -> DMatrix<f64> {
        &self.v + &self.dv * lambda
    }
}

pub fn covariance(v: &DMatrix<f64>) -> Result<BosonCovariance> {
    let eig = positive_eigen(v, "V")?;
    Ok(BosonCovariance {
        gamma_x: matrix_power(&eig, -0.5),
        gamma_p: matrix_power(&eig, 0.5),
        gap: 2.0 * eig.eigenvalues.min().sqrt(),
    })
}

/// `ln |⟨V|V'⟩|`. With `K = L⁻¹ W' L⁻ᵀ` for `W = L Lᵀ`, this is
/// `-½ Σ ln cosh(½ ln κ)` over the eigenvalues of `K`; every term is
/// second order in `κ - 1`, so nearby states lose no digits.
fn log_fidelity(w: &DMatrix<f64>, w_prime: &DMatrix<f64>) -> Result<f64> {
    let chol = w
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Stability("W is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(w_prime)
        .ok_or_else(|| Error::NumericalConsistency("singular Cholesky factor".into()))?;
    let k = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::NumericalConsistency("singular Cholesky factor".into()))?;
    let k = (&k + k.transpose()) * 0.5;
    let kappa = k.symmetric_eigenvalues();
    if kappa.min() <= 0.0 {
        return Err(Error::Stability("W' is not positive definite".into()));
    }
    let terms: Vec<f64> = kappa.iter().map(|&c| (0.5 * c.ln()).cosh().ln()).collect();
    Ok(-0.5 * pairwise_sum(&terms))
}

fn sqrt_matrix(v: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    Ok(matrix_power(&positive_eigen(v, name)?, 0.5))
}

/// `(det W det W')^{1/4} det((W + W')/2)^{-1/2}`, the overlap of the two
/// normalised ground states.
pub fn gaussian_fidelity(v: &DMatrix<f64>, v_prime: &DMatrix<f64>) -> Result<f64> {
    if v.shape() != v_prime.shape() {
        return Err(Error::input("V and V' differ in shape"));
    }
    Ok(log_fidelity(&sqrt_matrix(v, "V")?, &sqrt_matrix(v_prime, "V'")?)?.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BosonSusceptibility {
    pub value: f64,
    pub error_estimate: f64,
    pub raw: Vec<f64>,
}

/// `-∂² ln F(V, V + λ δV)` at `λ = 0` from the symmetric quotient
/// `-(ln F(h) + ln F(-h))/h²` with three Richardson levels; the first step is
/// `0.05 λ_min(V) / ‖δV‖`.
pub fn chi_f_boson(v: &DMatrix<f64>, dv: &DMatrix<f64>) -> Result<BosonSusceptibility> {
    check_symmetric(dv, "δV")?;
    let eig = positive_eigen(v, "V")?;
    let dv_norm = op_norm(dv);
    if dv_norm == 0.0 {
        return Ok(BosonSusceptibility {
            value: 0.0,
            error_estimate: 0.0,
            raw: Vec::new(),
        });
    }
    let w = matrix_power(&eig, 0.5);
    let h0 = 0.05 * eig.eigenvalues.min() / dv_norm;
    let mut samples = Vec::new();
    for h in halving_steps(h0, 3) {
        let plus = log_fidelity(&w, &sqrt_matrix(&(v + dv * h), "V + hδV")?)?;
        let minus = log_fidelity(&w, &sqrt_matrix(&(v - dv * h), "V - hδV")?)?;
        samples.push((h, -(plus + minus) / (h * h)));
    }
    let e = richardson(&samples, 2.0, 2.0);
    Ok(BosonSusceptibility {
        value: e.value,
        error_estimate: e.error_estimate,
        raw: e.raw,
    })
}

/// Second-order expansion of `ln F`:
/// `χ_F = ⅛ Σ_ij |δV_ij|² / ((w_i + w_j)² w_i w_j)` with `δV` written in the
/// eigenbasis of `W`.
pub fn chi_f_boson_leading_order(v: &DMatrix<f64>, dv: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(dv, "δV")?;
    let eig = positive_eigen(v, "V")?;
    let w = eig.eigenvalues.map(f64::sqrt);
    let u = &eig.eigenvectors;
    let rotated = u.transpose() * dv * u;
    let n = w.len();
    let terms: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let s = w[i] + w[j];
            rotated[(i, j)].powi(2) / (s * s * w[i] * w[j])
        })
        .collect();
    Ok(pairwise_sum(&terms) / 8.0)
}

/// Stages of `χ_F ≲ λ_min(Γ)⁻² ‖δΓ‖₂² = O(Δ⁻⁵ rank(δV) ‖δV‖²)`. The stages
/// hold up to unstated constants, so each comparison is reported as a ratio
/// and flagged rather than failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BosonBoundChain {
    pub chi_f: f64,
    /// `‖Γ⁻¹ δΓ‖₂²`.
    pub relative_norm: f64,
    /// `λ_min(Γ)⁻² ‖δΓ‖₂²`.
    pub covariance_bound: f64,
    /// `Δ⁻⁵ rank(δV) ‖δV‖²`.
    pub gap_bound: f64,
    pub rank: usize,
    pub gap: f64,
    /// `χ_F / covariance_bound`.
    pub covariance_ratio: f64,
    /// `χ_F / gap_bound`.
    pub gap_ratio: f64,
    /// Set when a ratio exceeds one.
    pub covariance_flag: bool,
    pub gap_flag: bool,
}

pub fn boson_bound_chain(v: &DMatrix<f64>, dv: &DMatrix<f64>) -> Result<BosonBoundChain> {
    let cov = covariance(v)?;
    let cov_prime = covariance(&(v + dv))?;
    let chi_f = chi_f_boson(v, dv)?.value;
    let gamma = cov.full();
    let d_gamma = cov_prime.full() - &gamma;
    // Γ_x Γ_p = I, so Γ⁻¹ = Γ_p ⊕ Γ_x
    let n = v.nrows();
    let mut gamma_inv = DMatrix::zeros(2 * n, 2 * n);
    gamma_inv.view_mut((0, 0), (n, n)).copy_from(&cov.gamma_p);
    gamma_inv.view_mut((n, n), (n, n)).copy_from(&cov.gamma_x);
    let relative_norm = (gamma_inv * &d_gamma).norm_squared();
    let gamma_min = gamma.symmetric_eigenvalues().min();
    let covariance_bound = d_gamma.norm_squared() / (gamma_min * gamma_min);
    let singular = dv.clone().symmetric_eigenvalues().map(f64::abs);
    let dv_op = singular.max();
    let rank = singular.iter().filter(|&&s| s > RANK_TOL * dv_op).count();
    let gap_bound = rank as f64 * dv_op * dv_op / cov.gap.powi(5);
    let ratio = |b: f64| if b == 0.0 { 0.0 } else { chi_f / b };
    let (covariance_ratio, gap_ratio) = (ratio(covariance_bound), ratio(gap_bound));
    Ok(BosonBoundChain {
        chi_f,
        relative_norm,
        covariance_bound,
        gap_bound,
        rank,
        gap: cov.gap,
        covariance_ratio,
        gap_ratio,
        covariance_flag: covariance_ratio > 1.0,
        gap_flag: gap_ratio > 1.0,
    })
}
