use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::numerics::{richardson, Extrapolation};
use crate::solver::{
    overlap, partial_trace_b, renyi2, spec_ground_state, GroundStateMethod, SolverOptions,
};
use crate::C64;

/// Default probe couplings for the finite-difference estimates.
pub const DEFAULT_PROBES: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// A finite-difference estimate together with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// Set when the raw sequence was not monotone in the step size.
    pub warning: bool,
    pub raw: Vec<f64>,
}

impl From<Extrapolation> for FdEstimate {
    fn from(e: Extrapolation) -> Self {
        Self {
            value: e.value,
            error_estimate: e.error_estimate,
            warning: !e.monotone,
            raw: e.raw,
        }
    }
}

fn ground(spec: &HamiltonianSpec, lambda: f64, opts: &SolverOptions) -> Result<DVector<C64>> {
    Ok(spec_ground_state(spec, lambda, GroundStateMethod::Auto, opts)?.state)
}

/// `S₂` of the ground state of `H(λ)`.
pub fn renyi2_at(spec: &HamiltonianSpec, lambda: f64, opts: &SolverOptions) -> Result<f64> {
    let psi = ground(spec, lambda, opts)?;
    let rho = partial_trace_b(&psi, spec.bipartition(), spec.lattice().local_dim())?;
    Ok(renyi2(&rho)?.1)
}

/// `ℱ(λ) = |⟨Ψ₀(0)|Ψ₀(λ)⟩|`.
pub fn fidelity(spec: &HamiltonianSpec, lambda: f64, opts: &SolverOptions) -> Result<f64> {
    let psi0 = ground(spec, 0.0, opts)?;
    overlap(&psi0, &ground(spec, lambda, opts)?)
}

fn check_probes(probes: &[f64]) -> Result<()> {
    if probes.is_empty()
        || probes.iter().any(|&h| !(h > 0.0))
        || probes.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::input("probe couplings must be positive and strictly decreasing"));
    }
    Ok(())
}

/// `χ_E` as the Richardson limit of `(S₂(h) + S₂(-h)) / (4h²)`.
pub fn chi_e_fd(spec: &HamiltonianSpec, probes: &[f64], opts: &SolverOptions) -> Result<FdEstimate> {
    check_probes(probes)?;
    let mut samples = Vec::with_capacity(probes.len());
    for &h in probes {
        let s = renyi2_at(spec, h, opts)? + renyi2_at(spec, -h, opts)?;
        samples.push((h, s / (4.0 * h * h)));
    }
    Ok(richardson(&samples, 2.0, 2.0).into())
}

/// `χ_F = -∂²ln ℱ/∂λ²` at `λ = 0` by central differences.
pub fn chi_f_fd(spec: &HamiltonianSpec, probes: &[f64], opts: &SolverOptions) -> Result<FdEstimate> {
    check_probes(probes)?;
    let psi0 = ground(spec, 0.0, opts)?;
    let log_f = |h: f64| -> Result<f64> { Ok(overlap(&psi0, &ground(spec, h, opts)?)?.ln()) };
    let mut samples = Vec::with_capacity(probes.len());
    for &h in probes {
        samples.push((h, -(log_f(h)? + log_f(-h)?) / (h * h)));
    }
    Ok(richardson(&samples, 2.0, 2.0).into())
}

/// `∂ⁿS₂/∂λⁿ` at `λ = 0` for `n ≤ 3` by central differences.
pub fn entanglement_derivative(
    spec: &HamiltonianSpec,
    order: usize,
    probes: &[f64],
    opts: &SolverOptions,
) -> Result<FdEstimate> {
    check_probes(probes)?;
    let s = |h: f64| renyi2_at(spec, h, opts);
    let s0 = if order == 2 { s(0.0)? } else { 0.0 };
    let mut samples = Vec::with_capacity(probes.len());
    for &h in probes {
        let d = match order {
            1 => (s(h)? - s(-h)?) / (2.0 * h),
            2 => (s(h)? + s(-h)? - 2.0 * s0) / (h * h),
            3 => (s(2.0 * h)? - 2.0 * s(h)? + 2.0 * s(-h)? - s(-2.0 * h)?) / (2.0 * h * h * h),
            _ => return Err(Error::input(format!("derivative order {order} not in 1..=3"))),
        };
        samples.push((h, d));
    }
    Ok(richardson(&samples, 2.0, 2.0).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::models;

    #[test]
    fn two_qubit_chi_e_fd() {
        let est = chi_e_fd(&models::two_qubit(), &DEFAULT_PROBES, &SolverOptions::default()).unwrap();
        assert!((est.value - 0.0625).abs() < 1e-6, "{}", est.value);
    }

    #[test]
    fn two_qubit_closed_form_s2() {
        // S₂(λ) = -ln(1 - 2a²b²) with a, b the amplitudes of |00⟩, |11⟩
        let opts = SolverOptions::default();
        for lambda in [0.3, 1.0, 2.0] {
            let t = (1.0 + (lambda * lambda / 4.0f64)).sqrt() - 1.0;
            let r = t / (lambda / 2.0);
            let a2 = 1.0 / (1.0 + r * r);
            let b2 = 1.0 - a2;
            let expected = -(1.0 - 2.0 * a2 * b2).ln();
            let s = renyi2_at(&models::two_qubit(), lambda, &opts).unwrap();
            assert!((s - expected).abs() < 1e-12, "{lambda}: {s} vs {expected}");
        }
    }

    #[test]
    fn second_derivative_is_four_chi_e() {
        let spec = models::tfim_chain(6, 1.7, 3).unwrap();
        let opts = SolverOptions::default();
        let amps = super::super::perturbation_amplitudes(&spec, &opts).unwrap();
        let d2 = entanglement_derivative(&spec, 2, &DEFAULT_PROBES, &opts).unwrap();
        assert!((d2.value / (4.0 * amps.chi_e()) - 1.0).abs() < 1e-6);
        let d1 = entanglement_derivative(&spec, 1, &DEFAULT_PROBES, &opts).unwrap();
        assert!(d1.value.abs() < 1e-8);
        assert!(entanglement_derivative(&spec, 4, &DEFAULT_PROBES, &opts).is_err());
    }

    #[test]
    fn rejects_bad_probes() {
        let opts = SolverOptions::default();
        assert!(chi_e_fd(&models::two_qubit(), &[1e-3, 1e-2], &opts).is_err());
        assert!(chi_f_fd(&models::two_qubit(), &[], &opts).is_err());
    }
}
