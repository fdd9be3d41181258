//! Imaginary-time cumulants of the boundary term from exact spectra.
//!
//! `g(λ, β) = ln(e^{βE₀}⟨Ψ₀|e^{-βH(λ)}|Ψ₀⟩) = Σ_n (-λ)ⁿ c_n(β)` where `Ψ₀`,
//! `E₀` belong to `H(0)`. The `c_n` are read off a polynomial fit in `λ` of
//! degree one less than the number of probes.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::amplitudes::perturbation_amplitudes;
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, HamiltonianSpec, Part};
use crate::numerics::linear_least_squares;
use crate::solver::{full_spectrum_with_cap, ground_state_dense, SolverOptions};
use crate::C64;

/// Default coupling probes for the polynomial fit.
pub const DEFAULT_LAMBDA_PROBES: [f64; 6] = [-0.02, -0.01, -0.005, 0.005, 0.01, 0.02];
/// Smallest `βΔ` included in the large-β linear fit.
pub const DEFAULT_TAIL_BETA_GAP: f64 = 10.0;
pub const MAX_ORDER: usize = 4;

/// Spectral weights of `Ψ₀` on the eigenbasis of `H(λ)`.
struct Weights {
    /// `(ln w_k, e_k - E₀)` for the nonzero weights.
    terms: Vec<(f64, f64)>,
}

impl Weights {
    fn new(spec: &HamiltonianSpec, lambda: f64, psi0: &DVector<C64>, e0: f64, opts: &SolverOptions) -> Result<Self> {
        let h = assemble(spec, Part::Full(lambda), opts.dense_cap)?;
        let s = full_spectrum_with_cap(&h, opts.dense_cap)?;
        let u = s.eigenvectors().expect("dense spectrum");
        let amps = u.adjoint() * psi0;
        let terms = amps
            .iter()
            .zip(s.eigenvalues())
            .filter(|(a, _)| a.norm_sqr() > 0.0)
            .map(|(a, &e)| (a.norm_sqr().ln(), e - e0))
            .collect();
        Ok(Self { terms })
    }

    /// `ln Σ_k w_k e^{-β(e_k - E₀ - shift)}` by log-sum-exp.
    fn log_moment(&self, beta: f64, shift: f64) -> Result<f64> {
        let exps: Vec<f64> = self
            .terms
            .iter()
            .map(|&(lw, de)| lw - beta * (de - shift))
            .collect();
        let m = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = exps.iter().map(|&x| (x - m).exp()).sum();
        let value = m + sum.ln();
        if !(sum > 0.0) || !value.is_finite() {
            return Err(Error::NumericalConsistency(format!(
                "imaginary-time overlap is not positive at β = {beta}"
            )));
        }
        Ok(value)
    }

    fn lowest_energy(&self) -> f64 {
        self.terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min)
    }
}

/// Large-β model `c_n(β) ≈ A_n β + B_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantFit {
    pub order: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `‖residual‖₂ / ‖c_n‖₂` over the fitted tail.
    pub relative_residual: f64,
    pub tail_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantSeries {
    pub beta_grid: Vec<f64>,
    /// `values[n - 1][i] = c_n(β_i)`.
    pub values: Vec<Vec<f64>>,
    pub fits: Vec<CumulantFit>,
    pub gap: f64,
    pub chi_f: f64,
}

impl CumulantSeries {
    pub fn fit(&self, order: usize) -> Option<&CumulantFit> {
        self.fits.iter().find(|f| f.order == order)
    }

    /// `B₂`.
    pub fn b2(&self) -> Option<f64> {
        self.fit(2).map(|f| f.intercept)
    }

    /// `|B₂ + χ_F|`.
    pub fn b2_discrepancy(&self) -> Option<f64> {
        self.b2().map(|b| (b + self.chi_f).abs())
    }
}

fn validate_grid(beta_grid: &[f64]) -> Result<()> {
    if beta_grid.is_empty()
        || beta_grid.iter().any(|&b| !(b > 0.0) || !b.is_finite())
        || beta_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::input("β grid must be positive and strictly ascending"));
    }
    Ok(())
}

/// Evenly spaced β grid covering `βΔ ∈ [from, to]`.
pub fn beta_grid_for_gap(gap: f64, from: f64, to: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|i| (from + (to - from) * i as f64 / (n - 1) as f64) / gap)
        .collect()
}

/// Unperturbed ground state and gap of `H(0)`.
pub fn unperturbed(spec: &HamiltonianSpec, opts: &SolverOptions) -> Result<(DVector<C64>, f64, f64)> {
    let h0 = assemble(spec, Part::Full(0.0), opts.dense_cap)?;
    let g = ground_state_dense(&h0, opts)?;
    Ok((g.state, g.energy, g.gap))
}

/// Cumulants `c_1..c_{n_max}` on `beta_grid` with large-β fits over the
/// points with `βΔ ≥ tail_beta_gap`.
pub fn cumulants(
    spec: &HamiltonianSpec,
    beta_grid: &[f64],
    probes: &[f64],
    n_max: usize,
    tail_beta_gap: f64,
    opts: &SolverOptions,
) -> Result<CumulantSeries> {
    validate_grid(beta_grid)?;
    if !(1..=MAX_ORDER).contains(&n_max) {
        return Err(Error::input(format!("cumulant order {n_max} not in 1..={MAX_ORDER}")));
    }
    // fit as many powers as the probes allow so higher orders do not alias into c_n
    if probes.len() <= n_max || probes.iter().any(|&l| l == 0.0) {
        return Err(Error::input(format!(
            "need at least {} nonzero coupling probes",
            n_max + 1
        )));
    }
    let degree = probes.len() - 1;
    let (psi0, e0, gap) = unperturbed(spec, opts)?;
    let chi_f = perturbation_amplitudes(spec, opts)?.chi_f();
    let weights = probes
        .iter()
        .map(|&l| Weights::new(spec, l, &psi0, e0, opts))
        .collect::<Result<Vec<_>>>()?;
    let design = DMatrix::from_fn(probes.len(), degree, |i, j| (-probes[i]).powi(j as i32 + 1));

    let mut values = vec![Vec::with_capacity(beta_grid.len()); n_max];
    for &beta in beta_grid {
        let g = weights
            .iter()
            .map(|w| w.log_moment(beta, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let fit = linear_least_squares(&design, &g, None)?;
        for (n, series) in values.iter_mut().enumerate() {
            series.push(fit.coefficients[n]);
        }
    }

    let tail: Vec<usize> = (0..beta_grid.len())
        .filter(|&i| beta_grid[i] * gap >= tail_beta_gap)
        .collect();
    if tail.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} β points with βΔ ≥ {tail_beta_gap}",
            tail.len()
        )));
    }
    let tail_design = DMatrix::from_fn(tail.len(), 2, |i, j| if j == 0 { beta_grid[tail[i]] } else { 1.0 });
    let mut fits = Vec::with_capacity(n_max);
    for (n, series) in values.iter().enumerate() {
        let y: Vec<f64> = tail.iter().map(|&i| series[i]).collect();
        let fit = linear_least_squares(&tail_design, &y, None)?;
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let relative_residual = if norm > 0.0 { fit.rss.sqrt() / norm } else { 0.0 };
        fits.push(CumulantFit {
            order: n + 1,
            slope: fit.coefficients[0],
            intercept: fit.coefficients[1],
            relative_residual,
            tail_points: tail.len(),
        });
    }
    Ok(CumulantSeries {
        beta_grid: beta_grid.to_vec(),
        values,
        fits,
        gap,
        chi_f,
    })
}

/// `N(β)/N(2β)^{1/2}` at the largest β of the grid, `N(β) = ⟨Ψ₀|e^{-βH(λ)}|Ψ₀⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaLimit {
    pub value: f64,
    /// Change between the last two grid points.
    pub convergence: f64,
    pub sequence: Vec<f64>,
}

pub fn fidelity_beta_limit(
    spec: &HamiltonianSpec,
    lambda: f64,
    beta_grid: &[f64],
    opts: &SolverOptions,
) -> Result<BetaLimit> {
    validate_grid(beta_grid)?;
    let (psi0, e0, _) = unperturbed(spec, opts)?;
    let w = Weights::new(spec, lambda, &psi0, e0, opts)?;
    let shift = w.lowest_energy();
    let sequence = beta_grid
        .iter()
        .map(|&b| Ok((w.log_moment(b, shift)? - 0.5 * w.log_moment(2.0 * b, shift)?).exp()))
        .collect::<Result<Vec<f64>>>()?;
    let n = sequence.len();
    let convergence = if n >= 2 {
        (sequence[n - 1] - sequence[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    Ok(BetaLimit {
        value: sequence[n - 1],
        convergence,
        sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::models;
    use crate::solver::{overlap, spec_ground_state, GroundStateMethod};

    fn grid(gap: f64) -> Vec<f64> {
        beta_grid_for_gap(gap, 5.0, 20.0, 16)
    }

    #[test]
    fn two_qubit_b2_is_minus_chi_f() {
        let spec = models::two_qubit();
        let opts = SolverOptions::default();
        let s = cumulants(&spec, &grid(2.0), &DEFAULT_LAMBDA_PROBES, 3, DEFAULT_TAIL_BETA_GAP, &opts)
            .unwrap();
        assert!((s.chi_f - 1.0 / 16.0).abs() < 1e-14);
        let b2 = s.b2().unwrap();
        assert!((b2 + 1.0 / 16.0).abs() < 1e-2 / 16.0, "B2 = {b2}");
        assert!(s.fit(2).unwrap().relative_residual < 1e-6);
    }

    #[test]
    fn first_cumulant_is_beta_times_mean() {
        let spec = models::random_chain(4, 2, 17).unwrap();
        let opts = SolverOptions::default();
        let (psi0, _, gap) = unperturbed(&spec, &opts).unwrap();
        let hb = assemble(&spec, Part::Boundary, 1 << 12).unwrap();
        let mean = psi0.dotc(&(hb.matrix() * &psi0)).re;
        let s = cumulants(&spec, &grid(gap), &DEFAULT_LAMBDA_PROBES, 2, DEFAULT_TAIL_BETA_GAP, &opts)
            .unwrap();
        for (b, c1) in s.beta_grid.iter().zip(&s.values[0]) {
            assert!((c1 - b * mean).abs() < 1e-8 * b.max(1.0), "{c1} vs {}", b * mean);
        }
        let f1 = s.fit(1).unwrap();
        assert!((f1.slope - mean).abs() < 1e-8);
        assert!(f1.intercept.abs() < 1e-7);
    }

    #[test]
    fn decoupled_spec_has_vanishing_cumulants() {
        let spec = models::Model::Tfim { j: 0.0, h: 1.0, g: 0.4 }
            .build(
                crate::hamiltonian::Lattice::chain(3, crate::hamiltonian::BoundaryCondition::Open),
                crate::hamiltonian::Bipartition::contiguous(3, 1).unwrap(),
            )
            .unwrap();
        let opts = SolverOptions::default();
        let (_, _, gap) = unperturbed(&spec, &opts).unwrap();
        let s = cumulants(&spec, &grid(gap), &DEFAULT_LAMBDA_PROBES, 4, DEFAULT_TAIL_BETA_GAP, &opts)
            .unwrap();
        assert!(s.values.iter().flatten().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn beta_limit_matches_overlap() {
        let spec = models::two_qubit();
        let opts = SolverOptions::default();
        let limit = fidelity_beta_limit(&spec, 1.0, &grid(2.0), &opts).unwrap();
        assert!((limit.value - 0.973249).abs() < 1e-6);
        let a = spec_ground_state(&spec, 0.0, GroundStateMethod::Dense, &opts).unwrap();
        let b = spec_ground_state(&spec, 1.0, GroundStateMethod::Dense, &opts).unwrap();
        assert!((limit.value - overlap(&a.state, &b.state).unwrap()).abs() < 1e-6);
        let zero = fidelity_beta_limit(&spec, 0.0, &grid(2.0), &opts).unwrap();
        assert!((zero.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = models::two_qubit();
        let opts = SolverOptions::default();
        assert!(cumulants(&spec, &[2.0, 1.0], &DEFAULT_LAMBDA_PROBES, 2, 10.0, &opts).is_err());
        assert!(cumulants(&spec, &grid(2.0), &DEFAULT_LAMBDA_PROBES, 5, 10.0, &opts).is_err());
        assert!(cumulants(&spec, &grid(2.0), &[0.01, 0.02], 2, 10.0, &opts).is_err());
    }
}
