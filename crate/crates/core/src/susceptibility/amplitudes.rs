use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble_region, HamiltonianSpec, Part, TermRegion};
use crate::numerics::pairwise_sum;
use crate::solver::{
    full_spectrum_with_cap, DensityMatrix, LinearOperator, SolverOptions, SparseHamiltonian,
    Spectrum,
};
use crate::C64;

/// First-order amplitudes `C(p_A, p_B) = ⟨p_A p_B|H_∂|0_A 0_B⟩ / (E_{p_A} + E_{p_B} - E₀)`
/// in the product eigenbasis of `H_A + H_B`.
#[derive(Debug, Clone)]
pub struct PerturbationAmplitudes {
    spectrum_a: Spectrum,
    spectrum_b: Spectrum,
    /// `dim_A x dim_B`, with the `(0, 0)` entry set to zero.
    c: DMatrix<C64>,
    e0: f64,
    boundary_mean: f64,
    boundary_second_moment: f64,
}

fn factor_spectrum(spec: &HamiltonianSpec, region: TermRegion, opts: &SolverOptions) -> Result<Spectrum> {
    let h = assemble_region(spec, region, opts.dense_cap)?;
    let s = full_spectrum_with_cap(&h, opts.dense_cap)?;
    let tolerance = opts.degeneracy_tol * s.spectral_radius().max(f64::MIN_POSITIVE);
    if s.gap() < tolerance {
        return Err(Error::DegenerateGroundState {
            splitting: s.gap(),
            tolerance,
        });
    }
    Ok(s)
}

/// Builds the amplitudes by applying `H_∂` once to `|0_A 0_B⟩` and rotating
/// the result into the product eigenbasis.
pub fn perturbation_amplitudes(
    spec: &HamiltonianSpec,
    opts: &SolverOptions,
) -> Result<PerturbationAmplitudes> {
    let spectrum_a = factor_spectrum(spec, TermRegion::BulkA, opts)?;
    let spectrum_b = factor_spectrum(spec, TermRegion::BulkB, opts)?;
    let ua = spectrum_a.eigenvectors().expect("dense spectrum");
    let ub = spectrum_b.eigenvectors().expect("dense spectrum");
    let (da, db) = (ua.nrows(), ub.nrows());

    let a0 = ua.column(0);
    let b0 = ub.column(0);
    let psi0 = DVector::from_fn(da * db, |k, _| a0[k / db] * b0[k % db]);
    let boundary = SparseHamiltonian::new(spec, Part::Boundary)?;
    let phi = boundary.apply_vec(&psi0);
    let boundary_mean = psi0.dotc(&phi).re;
    let boundary_second_moment = phi.norm_squared();

    let phi = DMatrix::from_row_slice(da, db, phi.as_slice());
    let mut c = ua.adjoint() * phi * ub.map(|z| z.conj());
    let ea = spectrum_a.eigenvalues();
    let eb = spectrum_b.eigenvalues();
    let e0 = ea[0] + eb[0];
    for i in 0..da {
        for j in 0..db {
            if i == 0 && j == 0 {
                c[(0, 0)] = C64::ZERO;
            } else {
                c[(i, j)] /= C64::from(ea[i] + eb[j] - e0);
            }
        }
    }
    Ok(PerturbationAmplitudes {
        spectrum_a,
        spectrum_b,
        c,
        e0,
        boundary_mean,
        boundary_second_moment,
    })
}

impl PerturbationAmplitudes {
    pub fn spectrum_a(&self) -> &Spectrum {
        &self.spectrum_a
    }

    pub fn spectrum_b(&self) -> &Spectrum {
        &self.spectrum_b
    }

    /// The amplitude matrix indexed by `(p_A, p_B)`.
    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.c
    }

    /// Unperturbed ground energy `E_{0_A} + E_{0_B}`.
    pub fn ground_energy(&self) -> f64 {
        self.e0
    }

    /// Gap of `H(0)`: the smaller of the two factor gaps.
    pub fn gap(&self) -> f64 {
        self.spectrum_a.gap().min(self.spectrum_b.gap())
    }

    /// `⟨Ψ₀|H_∂|Ψ₀⟩` in the unperturbed ground state.
    pub fn boundary_mean(&self) -> f64 {
        self.boundary_mean
    }

    /// `⟨Ψ₀|H_∂²|Ψ₀⟩ - ⟨Ψ₀|H_∂|Ψ₀⟩²`.
    pub fn boundary_variance(&self) -> f64 {
        (self.boundary_second_moment - self.boundary_mean * self.boundary_mean).max(0.0)
    }

    fn sum_sq(&self, include: impl Fn(usize, usize) -> bool) -> f64 {
        let mut terms = Vec::with_capacity(self.c.len());
        for i in 0..self.c.nrows() {
            for j in 0..self.c.ncols() {
                if include(i, j) {
                    terms.push(self.c[(i, j)].norm_sqr());
                }
            }
        }
        pairwise_sum(&terms)
    }

    /// `Σ_{p_A, p_B ≥ 1} |C|²`.
    pub fn chi_e(&self) -> f64 {
        self.sum_sq(|i, j| i >= 1 && j >= 1)
    }

    /// `Σ_{p_A + p_B ≥ 1} |C|²`.
    pub fn chi_f(&self) -> f64 {
        self.sum_sq(|i, j| i + j >= 1)
    }

    /// Normalised first-order state `𝒩(|0⟩ - λ Σ C|p⟩)` in the A-major site basis.
    pub fn first_order_state(&self, lambda: f64) -> DVector<C64> {
        let ua = self.spectrum_a.eigenvectors().expect("dense spectrum");
        let ub = self.spectrum_b.eigenvectors().expect("dense spectrum");
        let mut m = -&self.c * C64::from(lambda);
        m[(0, 0)] = C64::ONE;
        let m = ua * m * ub.transpose();
        let (da, db) = (m.nrows(), m.ncols());
        let v = DVector::from_fn(da * db, |k, _| m[(k / db, k % db)]);
        let n = v.norm();
        v.unscale(n)
    }
}

/// Second-order reduced density matrix from the perturbative expansion.
#[derive(Debug, Clone)]
pub struct PerturbativeRdm {
    /// `𝒩²(ρ⁽⁰⁾ + λρ⁽¹⁾ + λ²ρ⁽²⁾)` in the site basis of A.
    pub rho: DensityMatrix,
    /// `𝒩² = 1 / (1 + λ² Σ|C|²)`.
    pub norm_sq: f64,
}

impl PerturbativeRdm {
    /// `𝒩`, which approximates the ground-state fidelity.
    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }
}

/// `ρ⁽¹⁾ = -Σ_{p_A} (C(p_A,0)|p_A⟩⟨0| + h.c.)`, `ρ⁽²⁾ = C C†` in the A eigenbasis,
/// rotated back to the site basis.
pub fn perturbative_rdm(amps: &PerturbationAmplitudes, lambda: f64) -> Result<PerturbativeRdm> {
    let c = &amps.c;
    let da = c.nrows();
    let mut rho = DMatrix::<C64>::zeros(da, da);
    rho[(0, 0)] = C64::ONE;
    for p in 1..da {
        let v = -c[(p, 0)] * lambda;
        rho[(p, 0)] += v;
        rho[(0, p)] += v.conj();
    }
    rho += c * c.adjoint() * C64::from(lambda * lambda);
    let norm_sq = 1.0 / (1.0 + lambda * lambda * amps.chi_f());
    let ua = amps.spectrum_a.eigenvectors().expect("dense spectrum");
    let rho = ua * rho * ua.adjoint() * C64::from(norm_sq);
    Ok(PerturbativeRdm {
        rho: DensityMatrix::new(rho)?,
        norm_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::models;
    use crate::solver::renyi2;

    #[test]
    fn two_qubit_amplitudes() {
        let amps = perturbation_amplitudes(&models::two_qubit(), &SolverOptions::default()).unwrap();
        let c = amps.amplitudes();
        assert!((c[(1, 1)].norm() - 0.25).abs() < 1e-14);
        assert!(c[(0, 1)].norm() < 1e-15 && c[(1, 0)].norm() < 1e-15);
        assert!((amps.chi_e() - 1.0 / 16.0).abs() < 1e-14);
        assert!((amps.chi_f() - 1.0 / 16.0).abs() < 1e-14);
        assert!((amps.gap() - 2.0).abs() < 1e-14);
        assert!((amps.boundary_variance() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_qubit_rdm_orders() {
        let amps = perturbation_amplitudes(&models::two_qubit(), &SolverOptions::default()).unwrap();
        let r0 = perturbative_rdm(&amps, 0.0).unwrap();
        assert!((r0.rho.matrix()[(0, 0)] - C64::ONE).norm() < 1e-15);
        assert_eq!(r0.norm_sq, 1.0);
        let lambda = 0.1;
        let r = perturbative_rdm(&amps, lambda).unwrap();
        let n2 = 1.0 / (1.0 + lambda * lambda / 16.0);
        assert!((r.norm_sq - n2).abs() < 1e-15);
        // ρ⁽¹⁾ = 0 and ρ⁽²⁾ = |1⟩⟨1| / 16
        let m = r.rho.matrix();
        assert!((m[(1, 1)].re - n2 * lambda * lambda / 16.0).abs() < 1e-15);
        assert!(m[(0, 1)].norm() < 1e-15);
        assert!((m.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_free_spec_has_no_amplitudes() {
        let spec = models::Model::Tfim { j: 0.0, h: 1.0, g: 0.3 }
            .build(
                crate::hamiltonian::Lattice::chain(4, crate::hamiltonian::BoundaryCondition::Open),
                crate::hamiltonian::Bipartition::contiguous(4, 2).unwrap(),
            )
            .unwrap();
        let amps = perturbation_amplitudes(&spec, &SolverOptions::default()).unwrap();
        assert_eq!(amps.chi_f(), 0.0);
        assert_eq!(amps.chi_e(), 0.0);
    }

    #[test]
    fn commuting_boundary_with_eigenstate_gives_zero() {
        // -Z0 - Z1 - Z0 Z1: |00⟩ is an eigenvector of the ZZ coupling
        let terms = vec![
            crate::hamiltonian::OperatorTerm::one_site(0, -1.0, crate::hamiltonian::pauli::z()).unwrap(),
            crate::hamiltonian::OperatorTerm::one_site(1, -1.0, crate::hamiltonian::pauli::z()).unwrap(),
            crate::hamiltonian::OperatorTerm::two_site(
                0,
                1,
                -1.0,
                crate::hamiltonian::pauli::z(),
                crate::hamiltonian::pauli::z(),
            )
            .unwrap(),
        ];
        let spec = HamiltonianSpec::new(
            crate::hamiltonian::Lattice::chain(2, crate::hamiltonian::BoundaryCondition::Open),
            terms,
            crate::hamiltonian::Bipartition::contiguous(2, 1).unwrap(),
        )
        .unwrap();
        let amps = perturbation_amplitudes(&spec, &SolverOptions::default()).unwrap();
        assert!(amps.chi_f() < 1e-30);
    }

    #[test]
    fn first_order_state_purity_tracks_chi_e() {
        let spec = models::random_chain(6, 3, 5).unwrap();
        let amps = perturbation_amplitudes(&spec, &SolverOptions::default()).unwrap();
        let lambda = 1e-3;
        let rdm = perturbative_rdm(&amps, lambda).unwrap();
        let (p, _) = renyi2(&rdm.rho).unwrap();
        let expected = 1.0 - 2.0 * lambda * lambda * amps.chi_e();
        assert!((p - expected).abs() < 1e-9, "{p} vs {expected}");
        // the same quantity from the explicit first-order state
        let psi = amps.first_order_state(lambda);
        let rho = crate::solver::partial_trace_b(&psi, spec.bipartition(), 2).unwrap();
        assert!((rho.matrix() - rdm.rho.matrix()).norm() < 1e-12);
    }
}
