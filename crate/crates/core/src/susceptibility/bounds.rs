use serde::Serialize;

use super::amplitudes::{perturbation_amplitudes, PerturbationAmplitudes};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::solver::SolverOptions;

/// `Δ⁻² (⟨H_∂²⟩ - ⟨H_∂⟩²)` in the unperturbed ground state.
pub fn correlator_bound(amps: &PerturbationAmplitudes, opts: &SolverOptions) -> Result<f64> {
    let gap = amps.gap();
    let scale = amps
        .spectrum_a()
        .spectral_radius()
        .max(amps.spectrum_b().spectral_radius())
        .max(f64::MIN_POSITIVE);
    if !(gap >= opts.degeneracy_tol * scale) {
        return Err(Error::Gapless(format!("gap {gap:e} of the decoupled Hamiltonian")));
    }
    Ok(amps.boundary_variance() / (gap * gap))
}

/// `Δ⁻² max‖h_j‖² ξ^{d-1} |∂A|`.
pub fn area_bound(gap: f64, max_norm: f64, xi: f64, dim: usize, boundary_size: usize) -> f64 {
    max_norm * max_norm * xi.powi(dim as i32 - 1) * boundary_size as f64 / (gap * gap)
}

/// The susceptibilities of one spec together with the bounds they obey.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SusceptibilityReport {
    pub chi_e: f64,
    pub chi_f: f64,
    pub correlator_bound: f64,
    /// Present when a correlation length was supplied.
    pub area_bound: Option<f64>,
    pub gap: f64,
    pub boundary_size: usize,
    pub max_term_norm: f64,
}

/// Relative slack allowed when comparing the members of the bound chain.
pub const CHAIN_SLACK: f64 = 1e-9;

impl SusceptibilityReport {
    /// `χ_E ≤ χ_F` within relative slack.
    pub fn chi_e_below_chi_f(&self) -> bool {
        self.chi_e <= self.chi_f * (1.0 + CHAIN_SLACK) + f64::MIN_POSITIVE
    }

    /// `χ_F ≤ Δ⁻²⟨H_∂²⟩_c` within relative slack.
    pub fn chi_f_below_correlator(&self) -> bool {
        self.chi_f <= self.correlator_bound * (1.0 + CHAIN_SLACK) + f64::MIN_POSITIVE
    }

    pub fn chain_holds(&self) -> bool {
        self.chi_e_below_chi_f() && self.chi_f_below_correlator()
    }
}

/// Computes `χ_E`, `χ_F` and the bounds. `xi` is the correlation length used
/// for the area bound.
pub fn susceptibility_report(
    spec: &HamiltonianSpec,
    xi: Option<f64>,
    opts: &SolverOptions,
) -> Result<SusceptibilityReport> {
    let amps = perturbation_amplitudes(spec, opts)?;
    let correlator = correlator_bound(&amps, opts)?;
    let gap = amps.gap();
    let dim = spec.lattice().lengths().len();
    let area = match xi {
        Some(xi) if xi > 0.0 => Some(area_bound(
            gap,
            spec.max_boundary_norm(),
            xi,
            dim,
            spec.boundary_size(),
        )),
        Some(xi) => return Err(Error::input(format!("correlation length {xi} must be positive"))),
        None => None,
    };
    Ok(SusceptibilityReport {
        chi_e: amps.chi_e(),
        chi_f: amps.chi_f(),
        correlator_bound: correlator,
        area_bound: area,
        gap,
        boundary_size: spec.boundary_size(),
        max_term_norm: spec.max_boundary_norm(),
    })
}
