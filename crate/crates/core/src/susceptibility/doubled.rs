//! Two copies of the system and the swap `S₁₃` of their A factors.
//!
//! A doubled vector is stored copy-major: index `i₁ D + i₂` with `i = a·dim_B + b`
//! the A-major index of each copy. Operators act matrix-free, viewing the
//! vector as a `D x D` matrix `X` so that `H⊗1 + 1⊗H` acts as `H X + X Hᵀ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, HamiltonianSpec, Part};
use crate::solver::{
    fix_phase, lanczos_lowest, overlap, partial_trace_b, renyi2, LinearOperator, SolverOptions,
};
use crate::C64;

/// Default cap on the doubled dimension `D²`.
pub const DEFAULT_DOUBLED_CAP: usize = 1 << 12;

fn swap_permutation(dim_a: usize, dim_b: usize) -> Vec<usize> {
    let d = dim_a * dim_b;
    let mut perm = vec![0; d * d];
    for a1 in 0..dim_a {
        for b1 in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    let from = (a1 * dim_b + b1) * d + a2 * dim_b + b2;
                    let to = (a2 * dim_b + b1) * d + a1 * dim_b + b2;
                    perm[from] = to;
                }
            }
        }
    }
    perm
}

fn doubled_dims(spec: &HamiltonianSpec, cap: usize) -> Result<(usize, usize)> {
    let (dim_a, dim_b) = spec.bipartition().dims(spec.lattice().local_dim())?;
    let d = dim_a * dim_b;
    match d.checked_mul(d) {
        Some(dd) if dd <= cap => Ok((dim_a, dim_b)),
        _ => Err(Error::Capacity {
            dimension: d.saturating_mul(d),
            cap,
        }),
    }
}

/// `H⁽²⁾ = H⊗1 + 1⊗H` for `H(λ)`, the swap `S₁₃` and the twisted boundary
/// `V_∂ = H_∂⁽²⁾ - S₁₃ H_∂⁽²⁾ S₁₃`.
#[derive(Debug, Clone)]
pub struct DoubledSystem {
    h: DMatrix<C64>,
    h_boundary: DMatrix<C64>,
    swap: Vec<usize>,
}

impl DoubledSystem {
    pub fn new(spec: &HamiltonianSpec, lambda: f64, cap: usize) -> Result<Self> {
        let (dim_a, dim_b) = doubled_dims(spec, cap)?;
        Ok(Self {
            h: assemble(spec, Part::Full(lambda), cap)?.into_matrix(),
            h_boundary: assemble(spec, Part::Boundary, cap)?.into_matrix(),
            swap: swap_permutation(dim_a, dim_b),
        })
    }

    /// `D²`.
    pub fn dimension(&self) -> usize {
        self.swap.len()
    }

    /// `S₁₃` as a permutation: basis state `i` maps to `swap[i]`.
    pub fn swap_permutation(&self) -> &[usize] {
        &self.swap
    }

    pub fn apply_swap(&self, x: &[C64], y: &mut [C64]) {
        for (i, &j) in self.swap.iter().enumerate() {
            y[j] = x[i];
        }
    }

    fn apply_sum(&self, m: &DMatrix<C64>, x: &[C64], y: &mut [C64]) {
        let d = m.nrows();
        // x is row-major D x D; nalgebra is column-major, so this view is Xᵀ
        let xt = DMatrix::from_column_slice(d, d, x);
        // (H X + X Hᵀ)ᵀ = Xᵀ Hᵀ + H Xᵀ
        let yt = &xt * m.transpose() + m * &xt;
        y.copy_from_slice(yt.as_slice());
    }

    /// `y = H⁽²⁾ x`.
    pub fn apply_doubled(&self, x: &[C64], y: &mut [C64]) {
        self.apply_sum(&self.h, x, y);
    }

    /// `y = S₁₃ H⁽²⁾ S₁₃ x`.
    pub fn apply_twisted(&self, x: &[C64], y: &mut [C64]) {
        let mut sx = vec![C64::ZERO; x.len()];
        self.apply_swap(x, &mut sx);
        let mut hsx = vec![C64::ZERO; x.len()];
        self.apply_sum(&self.h, &sx, &mut hsx);
        self.apply_swap(&hsx, y);
    }

    /// `y = V_∂ x`.
    pub fn apply_twisted_boundary(&self, x: &[C64], y: &mut [C64]) {
        self.apply_sum(&self.h_boundary, x, y);
        let mut sx = vec![C64::ZERO; x.len()];
        self.apply_swap(x, &mut sx);
        let mut hsx = vec![C64::ZERO; x.len()];
        self.apply_sum(&self.h_boundary, &sx, &mut hsx);
        let mut shsx = vec![C64::ZERO; x.len()];
        self.apply_swap(&hsx, &mut shsx);
        for (yi, v) in y.iter_mut().zip(shsx) {
            *yi -= v;
        }
    }

    /// Dense `V_∂`, built column by column.
    pub fn twisted_boundary_matrix(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::ZERO; n];
        let mut col = vec![C64::ZERO; n];
        for j in 0..n {
            e[j] = C64::ONE;
            self.apply_twisted_boundary(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = C64::ZERO;
        }
        m
    }

    fn norm_bound(&self) -> f64 {
        let row_sum = (0..self.h.nrows())
            .map(|i| self.h.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        2.0 * row_sum
    }
}

struct Doubled<'a>(&'a DoubledSystem);
struct Twisted<'a>(&'a DoubledSystem);

impl LinearOperator for Doubled<'_> {
    fn dim(&self) -> usize {
        self.0.dimension()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.0.apply_doubled(x, y);
    }
    fn norm_bound(&self) -> f64 {
        self.0.norm_bound()
    }
}

impl LinearOperator for Twisted<'_> {
    fn dim(&self) -> usize {
        self.0.dimension()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.0.apply_twisted(x, y);
    }
    fn norm_bound(&self) -> f64 {
        self.0.norm_bound()
    }
}

fn tensor_square(psi: &DVector<C64>) -> DVector<C64> {
    let d = psi.len();
    DVector::from_fn(d * d, |k, _| psi[k / d] * psi[k % d])
}

/// `⟨Ψ⊗Ψ|S₁₃|Ψ⊗Ψ⟩`.
pub fn swap_purity(
    state: &DVector<C64>,
    spec: &HamiltonianSpec,
    cap: usize,
) -> Result<f64> {
    let (dim_a, dim_b) = doubled_dims(spec, cap)?;
    if state.len() != dim_a * dim_b {
        return Err(Error::input(format!(
            "state of length {} does not match dimension {}",
            state.len(),
            dim_a * dim_b
        )));
    }
    let doubled = tensor_square(state);
    let mut swapped = DVector::zeros(doubled.len());
    for (i, &j) in swap_permutation(dim_a, dim_b).iter().enumerate() {
        swapped[j] = doubled[i];
    }
    let value = doubled.dotc(&swapped);
    if value.im.abs() > 1e-12 {
        return Err(Error::NumericalConsistency(format!(
            "swap expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Ground states of `H⁽²⁾(λ)` and of its twisted conjugate, found
/// independently, with their overlap and the direct purity.
#[derive(Debug, Clone)]
pub struct TwistedOverlap {
    pub overlap: f64,
    pub purity: f64,
    pub doubled_ground: DVector<C64>,
    pub twisted_ground: DVector<C64>,
}

/// Phase of `v` fixed by a positive overlap with `reference`, falling back to
/// the largest component when the overlap is negligible.
fn fix_phase_against(v: &mut DVector<C64>, reference: &DVector<C64>) {
    let z = reference.dotc(v);
    if z.norm() > 1e-8 {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    } else {
        fix_phase(v);
    }
}

pub fn twisted_ground_overlap(
    spec: &HamiltonianSpec,
    lambda: f64,
    cap: usize,
    opts: &SolverOptions,
) -> Result<TwistedOverlap> {
    let system = DoubledSystem::new(spec, lambda, cap)?;
    let lowest_pair = |op: &dyn LinearOperator| -> Result<DVector<C64>> {
        let g = lanczos_lowest(op, &[], opts)?;
        let e = lanczos_lowest(op, std::slice::from_ref(&g.vector), opts)?;
        let tolerance = opts.degeneracy_tol * g.spectral_estimate.max(e.value.abs());
        if e.value - g.value < tolerance {
            return Err(Error::DegenerateGroundState {
                splitting: e.value - g.value,
                tolerance,
            });
        }
        Ok(g.vector)
    };
    let mut doubled_ground = lowest_pair(&Doubled(&system))?;
    let mut twisted_ground = lowest_pair(&Twisted(&system))?;

    // unperturbed product reference and its swapped image
    let reference = DoubledSystem::new(spec, 0.0, cap)?;
    let ref_state = lowest_pair(&Doubled(&reference))?;
    let mut ref_twisted = DVector::zeros(ref_state.len());
    reference.apply_swap(ref_state.as_slice(), ref_twisted.as_mut_slice());
    fix_phase_against(&mut doubled_ground, &ref_state);
    fix_phase_against(&mut twisted_ground, &ref_twisted);

    let psi = crate::solver::spec_ground_state(
        spec,
        lambda,
        crate::solver::GroundStateMethod::Dense,
        opts,
    )?
    .state;
    let rho = partial_trace_b(&psi, spec.bipartition(), spec.lattice().local_dim())?;
    let (purity, _) = renyi2(&rho)?;
    Ok(TwistedOverlap {
        overlap: overlap(&doubled_ground, &twisted_ground)?,
        purity,
        doubled_ground,
        twisted_ground,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{is_hermitian, models, Bipartition};
    use crate::solver::{spec_ground_state, GroundStateMethod};

    #[test]
    fn swap_is_an_involutive_permutation() {
        let perm = swap_permutation(2, 4);
        let mut seen = vec![false; perm.len()];
        for (i, &j) in perm.iter().enumerate() {
            assert!(!seen[j]);
            seen[j] = true;
            assert_eq!(perm[j], i);
        }
    }

    #[test]
    fn swap_purity_examples() {
        let spec = models::two_qubit();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let product = DVector::from_vec(vec![C64::ONE, C64::ZERO, C64::ZERO, C64::ZERO]);
        assert!((swap_purity(&product, &spec, DEFAULT_DOUBLED_CAP).unwrap() - 1.0).abs() < 1e-15);
        let bell = DVector::from_vec(vec![C64::from(r), C64::ZERO, C64::ZERO, C64::from(r)]);
        assert!((swap_purity(&bell, &spec, DEFAULT_DOUBLED_CAP).unwrap() - 0.5).abs() < 1e-15);
        let gs = spec_ground_state(&spec, 1.0, GroundStateMethod::Dense, &SolverOptions::default())
            .unwrap();
        assert!((swap_purity(&gs.state, &spec, DEFAULT_DOUBLED_CAP).unwrap() - 0.9).abs() < 1e-12);
        assert!(matches!(
            swap_purity(&gs.state, &spec, 8),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn twisted_overlap_two_qubit() {
        let spec = models::two_qubit();
        let opts = SolverOptions::default();
        let t0 = twisted_ground_overlap(&spec, 0.0, DEFAULT_DOUBLED_CAP, &opts).unwrap();
        assert!((t0.overlap - 1.0).abs() < 1e-10);
        let t1 = twisted_ground_overlap(&spec, 1.0, DEFAULT_DOUBLED_CAP, &opts).unwrap();
        assert!((t1.overlap - 0.9).abs() < 1e-9);
        assert!((t1.purity - 0.9).abs() < 1e-12);
        // S₁₃ maps the twisted ground state onto the doubled one
        let system = DoubledSystem::new(&spec, 1.0, DEFAULT_DOUBLED_CAP).unwrap();
        let mut mapped = DVector::zeros(t1.twisted_ground.len());
        system.apply_swap(t1.twisted_ground.as_slice(), mapped.as_mut_slice());
        assert!((overlap(&mapped, &t1.doubled_ground).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn doubled_operator_matches_kronecker() {
        let spec = models::random_chain(3, 1, 9).unwrap();
        let system = DoubledSystem::new(&spec, 0.6, DEFAULT_DOUBLED_CAP).unwrap();
        let h = assemble(&spec, Part::Full(0.6), 64).unwrap().into_matrix();
        let id = DMatrix::<C64>::identity(8, 8);
        let h2 = h.kronecker(&id) + id.kronecker(&h);
        let x = DVector::from_fn(64, |i, _| C64::new((i as f64).sin(), (0.3 * i as f64).cos()));
        let mut y = vec![C64::ZERO; 64];
        system.apply_doubled(x.as_slice(), &mut y);
        let expected = &h2 * &x;
        for i in 0..64 {
            assert!((y[i] - expected[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn twisted_boundary_is_hermitian() {
        let spec = models::random_chain(3, 2, 4)
            .unwrap()
            .with_bipartition(Bipartition::new(3, &[0, 2]).unwrap())
            .unwrap();
        let system = DoubledSystem::new(&spec, 1.0, DEFAULT_DOUBLED_CAP).unwrap();
        let v = system.twisted_boundary_matrix();
        assert!(v.norm() > 1e-3);
        assert!(is_hermitian(&v, 1e-12));
    }
}
