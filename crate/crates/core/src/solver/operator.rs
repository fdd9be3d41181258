use nalgebra::DVector;

use crate::error::Result;
use crate::hamiltonian::{BasisLayout, DenseHermitianOperator, HamiltonianSpec, LocalTerm, Part};
use crate::C64;

/// A Hermitian operator that can be applied to vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// Any upper bound on the operator norm.
    fn norm_bound(&self) -> f64;

    fn apply_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim());
        self.apply(x.as_slice(), y.as_mut_slice());
        y
    }
}

impl LinearOperator for DenseHermitianOperator {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let m = self.matrix();
        y.iter_mut().for_each(|v| *v = C64::ZERO);
        // column-major storage: accumulate column by column
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::ZERO {
                continue;
            }
            for (yi, &mij) in y.iter_mut().zip(m.column(j).iter()) {
                *yi += mij * xj;
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        // max row sum bounds the spectral norm of a Hermitian matrix
        let m = self.matrix();
        (0..m.nrows())
            .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `H(λ)` or one of its parts applied term by term, never materialised.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    dim: usize,
    terms: Vec<LocalTerm>,
    norm_bound: f64,
}

impl SparseHamiltonian {
    pub fn new(spec: &HamiltonianSpec, part: Part) -> Result<Self> {
        let layout = BasisLayout::full(spec)?;
        let mut terms = Vec::new();
        let mut norm_bound = 0.0;
        for (term, region) in spec.tagged_terms() {
            let w = part.weight(region);
            if w != 0.0 {
                terms.push(LocalTerm::new(term, &layout, w)?);
                norm_bound += w.abs() * term.operator_norm();
            }
        }
        Ok(Self {
            dim: layout.dim(),
            terms,
            norm_bound,
        })
    }
}

impl LinearOperator for SparseHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::ZERO);
        for t in &self.terms {
            t.apply_add(x, y);
        }
    }

    fn norm_bound(&self) -> f64 {
        self.norm_bound
    }
}
