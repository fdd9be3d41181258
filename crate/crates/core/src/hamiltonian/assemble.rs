use nalgebra::DMatrix;

use super::{checked_pow, DenseHermitianOperator, HamiltonianSpec, OperatorTerm, Part, TermRegion};
use crate::error::{Error, Result};
use crate::C64;

/// Default cap on the dimension of densely assembled operators.
pub const DEFAULT_ASSEMBLY_CAP: usize = 1 << 14;

/// Tensor-product basis over an ordered list of sites; position 0 is the most
/// significant digit.
#[derive(Debug, Clone)]
pub struct BasisLayout {
    sites: Vec<usize>,
    position: Vec<Option<usize>>,
    local_dim: usize,
    dim: usize,
}

impl BasisLayout {
    pub fn new(sites: &[usize], num_sites: usize, local_dim: usize) -> Result<Self> {
        let mut position = vec![None; num_sites];
        for (p, &s) in sites.iter().enumerate() {
            if s >= num_sites || position[s].is_some() {
                return Err(Error::input(format!("invalid site {s} in basis layout")));
            }
            position[s] = Some(p);
        }
        Ok(Self {
            sites: sites.to_vec(),
            position,
            local_dim,
            dim: checked_pow(local_dim, sites.len())?,
        })
    }

    /// The A-major layout of the whole lattice.
    pub fn full(spec: &HamiltonianSpec) -> Result<Self> {
        Self::new(
            &spec.bipartition().site_order(),
            spec.lattice().num_sites(),
            spec.lattice().local_dim(),
        )
    }

    /// Layout of one region's factor space.
    pub fn region(spec: &HamiltonianSpec, region: TermRegion) -> Result<Self> {
        let bp = spec.bipartition();
        let sites = match region {
            TermRegion::BulkA => bp.region_a(),
            TermRegion::BulkB => bp.region_b(),
            TermRegion::Boundary => {
                return Err(Error::input("the boundary has no factor space of its own"))
            }
        };
        Self::new(sites, spec.lattice().num_sites(), spec.lattice().local_dim())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Stride of the digit belonging to `site`.
    pub fn stride(&self, site: usize) -> Option<usize> {
        let p = (*self.position.get(site)?)?;
        Some(self.local_dim.pow((self.sites.len() - 1 - p) as u32))
    }
}

/// An operator term compiled against a [`BasisLayout`], ready for sparse
/// application or dense accumulation.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    strides: Vec<usize>,
    local_dim: usize,
    /// For each local input index, the nonzero `(output offset, value)` pairs.
    columns: Vec<Vec<(usize, C64)>>,
}

impl LocalTerm {
    pub fn new(term: &OperatorTerm, layout: &BasisLayout, weight: f64) -> Result<Self> {
        let strides = term
            .support()
            .iter()
            .map(|&s| {
                layout
                    .stride(s)
                    .ok_or_else(|| Error::input(format!("term site {s} not in layout")))
            })
            .collect::<Result<Vec<_>>>()?;
        let d = layout.local_dim();
        let local = term.local_matrix() * C64::from(weight);
        let k = strides.len();
        let local_size = d.pow(k as u32);
        let offset = |li: usize| -> usize {
            let mut rem = li;
            let mut off = 0;
            for i in (0..k).rev() {
                off += (rem % d) * strides[i];
                rem /= d;
            }
            off
        };
        let columns = (0..local_size)
            .map(|li| {
                (0..local_size)
                    .filter_map(|lo| {
                        let v = local[(lo, li)];
                        (v != C64::ZERO).then(|| (offset(lo), v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            strides,
            local_dim: d,
            columns,
        })
    }

    #[inline]
    fn split(&self, j: usize) -> (usize, usize) {
        let d = self.local_dim;
        let mut li = 0;
        let mut base = j;
        for &s in &self.strides {
            let digit = (j / s) % d;
            li = li * d + digit;
            base -= digit * s;
        }
        (li, base)
    }

    /// `y += term * x`.
    pub fn apply_add(&self, x: &[C64], y: &mut [C64]) {
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::ZERO {
                continue;
            }
            let (li, base) = self.split(j);
            for &(off, v) in &self.columns[li] {
                y[base + off] += v * xj;
            }
        }
    }

    /// `m += term` as a dense matrix.
    pub fn add_to_dense(&self, m: &mut DMatrix<C64>) {
        for j in 0..m.ncols() {
            let (li, base) = self.split(j);
            for &(off, v) in &self.columns[li] {
                m[(base + off, j)] += v;
            }
        }
    }
}

/// Dense matrix of the requested part of `H(λ)` in the A-major basis.
pub fn assemble(spec: &HamiltonianSpec, part: Part, cap: usize) -> Result<DenseHermitianOperator> {
    let layout = BasisLayout::full(spec)?;
    if layout.dim() > cap {
        return Err(Error::Capacity {
            dimension: layout.dim(),
            cap,
        });
    }
    let mut m = DMatrix::zeros(layout.dim(), layout.dim());
    for (term, region) in spec.tagged_terms() {
        let w = part.weight(region);
        if w != 0.0 {
            LocalTerm::new(term, &layout, w)?.add_to_dense(&mut m);
        }
    }
    Ok(DenseHermitianOperator::from_matrix_unchecked(m))
}

/// Dense `H_A` (resp. `H_B`) on the factor space of region A (resp. B).
pub fn assemble_region(
    spec: &HamiltonianSpec,
    region: TermRegion,
    cap: usize,
) -> Result<DenseHermitianOperator> {
    let layout = BasisLayout::region(spec, region)?;
    if layout.dim() > cap {
        return Err(Error::Capacity {
            dimension: layout.dim(),
            cap,
        });
    }
    let mut m = DMatrix::zeros(layout.dim(), layout.dim());
    for term in spec.terms_in(region) {
        LocalTerm::new(term, &layout, 1.0)?.add_to_dense(&mut m);
    }
    Ok(DenseHermitianOperator::from_matrix_unchecked(m))
}
