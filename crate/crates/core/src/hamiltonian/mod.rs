//! Local lattice Hamiltonians and their bulk/boundary decomposition.
//!
//! A [`HamiltonianSpec`] holds a list of local [`OperatorTerm`]s together with a
//! [`Bipartition`] of the sites. Every term is tagged as living in region A,
//! region B, or on the boundary (its support meets both regions), which gives
//! the one-parameter family `H(λ) = H_A + H_B + λ H_∂`.
//!
//! Basis ordering: sites of A in ascending order occupy the most significant
//! tensor positions, followed by the sites of B. A state vector of length
//! `dim_A * dim_B` is therefore a row-major `dim_A x dim_B` matrix and the
//! partial trace over B is a contiguous block reduction.

mod assemble;
mod lattice;
pub mod models;

pub use assemble::{assemble, assemble_region, BasisLayout, LocalTerm, DEFAULT_ASSEMBLY_CAP};
pub use lattice::{BoundaryCondition, Geometry, Lattice};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

const HERMITIAN_FACTOR_TOL: f64 = 1e-12;
const HERMITIAN_OPERATOR_TOL: f64 = 1e-10;

/// A split of the lattice sites into two nonempty complementary regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    region_a: Vec<usize>,
    region_b: Vec<usize>,
}

impl Bipartition {
    /// Builds the bipartition with `region_a` as A and the complement as B.
    pub fn new(num_sites: usize, region_a: &[usize]) -> Result<Self> {
        let mut in_a = vec![false; num_sites];
        for &s in region_a {
            if s >= num_sites {
                return Err(Error::input(format!(
                    "site {s} outside lattice of {num_sites} sites"
                )));
            }
            if in_a[s] {
                return Err(Error::input(format!("site {s} listed twice in region A")));
            }
            in_a[s] = true;
        }
        let a: Vec<usize> = (0..num_sites).filter(|&s| in_a[s]).collect();
        let b: Vec<usize> = (0..num_sites).filter(|&s| !in_a[s]).collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::input("both regions of a bipartition must be nonempty"));
        }
        Ok(Self {
            region_a: a,
            region_b: b,
        })
    }

    /// A = `{0, .., cut-1}`, B = the rest.
    pub fn contiguous(num_sites: usize, cut: usize) -> Result<Self> {
        Self::new(num_sites, &(0..cut).collect::<Vec<_>>())
    }

    pub fn region_a(&self) -> &[usize] {
        &self.region_a
    }

    pub fn region_b(&self) -> &[usize] {
        &self.region_b
    }

    pub fn num_sites(&self) -> usize {
        self.region_a.len() + self.region_b.len()
    }

    /// Same cut with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            region_a: self.region_b.clone(),
            region_b: self.region_a.clone(),
        }
    }

    pub fn contains_a(&self, site: usize) -> bool {
        self.region_a.binary_search(&site).is_ok()
    }

    /// Site order used for the tensor-product basis: A first, then B.
    pub fn site_order(&self) -> Vec<usize> {
        self.region_a.iter().chain(&self.region_b).copied().collect()
    }

    /// Hilbert space dimensions `(dim_A, dim_B)` for local dimension `d`.
    pub fn dims(&self, local_dim: usize) -> Result<(usize, usize)> {
        Ok((
            checked_pow(local_dim, self.region_a.len())?,
            checked_pow(local_dim, self.region_b.len())?,
        ))
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    base.checked_pow(exp as u32)
        .ok_or(Error::Capacity { dimension: usize::MAX, cap: usize::MAX })
}

/// `coefficient * (factor_0 ⊗ factor_1 ⊗ ...)` acting on the listed sites.
#[derive(Debug, Clone)]
pub struct OperatorTerm {
    support: Vec<usize>,
    coefficient: f64,
    factors: Vec<DMatrix<C64>>,
}

impl OperatorTerm {
    pub fn new(support: Vec<usize>, coefficient: f64, factors: Vec<DMatrix<C64>>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::input("operator term with empty support"));
        }
        if support.len() != factors.len() {
            return Err(Error::input(format!(
                "term has {} sites but {} factors",
                support.len(),
                factors.len()
            )));
        }
        for (i, s) in support.iter().enumerate() {
            if support[..i].contains(s) {
                return Err(Error::input(format!("site {s} repeated in term support")));
            }
        }
        let d = factors[0].nrows();
        for f in &factors {
            if f.nrows() != d || f.ncols() != d {
                return Err(Error::input("term factors must all be d x d"));
            }
            if !is_hermitian(f, HERMITIAN_FACTOR_TOL) {
                return Err(Error::input("term factor is not Hermitian"));
            }
        }
        if !coefficient.is_finite() {
            return Err(Error::input("non-finite term coefficient"));
        }
        Ok(Self {
            support,
            coefficient,
            factors,
        })
    }

    /// Single-site term.
    pub fn one_site(site: usize, coefficient: f64, op: DMatrix<C64>) -> Result<Self> {
        Self::new(vec![site], coefficient, vec![op])
    }

    /// Two-site product term `coefficient * a_i b_j`.
    pub fn two_site(
        i: usize,
        j: usize,
        coefficient: f64,
        a: DMatrix<C64>,
        b: DMatrix<C64>,
    ) -> Result<Self> {
        Self::new(vec![i, j], coefficient, vec![a, b])
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[DMatrix<C64>] {
        &self.factors
    }

    pub fn local_dim(&self) -> usize {
        self.factors[0].nrows()
    }

    /// Operator norm; the norm of a tensor product is the product of norms.
    pub fn operator_norm(&self) -> f64 {
        self.coefficient.abs()
            * self
                .factors
                .iter()
                .map(hermitian_operator_norm)
                .product::<f64>()
    }

    /// `coefficient * kron(factors)` in the local basis of the support.
    pub fn local_matrix(&self) -> DMatrix<C64> {
        let mut m = self.factors[0].clone();
        for f in &self.factors[1..] {
            m = m.kronecker(f);
        }
        m * C64::from(self.coefficient)
    }
}

/// Where a term lives relative to the bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermRegion {
    BulkA,
    BulkB,
    Boundary,
}

/// Which piece of `H(λ)` to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Part {
    /// `H_A + H_B + λ H_∂`.
    Full(f64),
    A,
    B,
    Boundary,
}

impl Part {
    /// Weight with which a term of the given region enters this part.
    pub fn weight(self, region: TermRegion) -> f64 {
        match (self, region) {
            (Part::Full(_), TermRegion::BulkA | TermRegion::BulkB) => 1.0,
            (Part::Full(lambda), TermRegion::Boundary) => lambda,
            (Part::A, TermRegion::BulkA) => 1.0,
            (Part::B, TermRegion::BulkB) => 1.0,
            (Part::Boundary, TermRegion::Boundary) => 1.0,
            _ => 0.0,
        }
    }
}

/// A local Hamiltonian on a bipartitioned lattice with every term classified.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    lattice: Lattice,
    terms: Vec<OperatorTerm>,
    bipartition: Bipartition,
    tags: Vec<TermRegion>,
    boundary_size: usize,
    max_boundary_norm: f64,
}

impl HamiltonianSpec {
    /// Validates the terms against the lattice and classifies them.
    pub fn new(lattice: Lattice, terms: Vec<OperatorTerm>, bipartition: Bipartition) -> Result<Self> {
        if bipartition.num_sites() != lattice.num_sites() {
            return Err(Error::input(format!(
                "bipartition covers {} sites, lattice has {}",
                bipartition.num_sites(),
                lattice.num_sites()
            )));
        }
        for t in &terms {
            if let Some(&s) = t.support().iter().find(|&&s| s >= lattice.num_sites()) {
                return Err(Error::input(format!(
                    "term support site {s} out of range for {} sites",
                    lattice.num_sites()
                )));
            }
            if t.local_dim() != lattice.local_dim() {
                return Err(Error::input(format!(
                    "term factor dimension {} does not match local dimension {}",
                    t.local_dim(),
                    lattice.local_dim()
                )));
            }
        }
        let mut spec = Self {
            lattice,
            terms,
            bipartition,
            tags: Vec::new(),
            boundary_size: 0,
            max_boundary_norm: 0.0,
        };
        spec.classify_terms();
        Ok(spec)
    }

    /// Tags each term and derives `|∂A|` and `max_j ‖h_j‖` over boundary terms.
    fn classify_terms(&mut self) {
        let bp = &self.bipartition;
        self.tags = self
            .terms
            .iter()
            .map(|t| {
                let touches_a = t.support().iter().any(|&s| bp.contains_a(s));
                let touches_b = t.support().iter().any(|&s| !bp.contains_a(s));
                match (touches_a, touches_b) {
                    (true, true) => TermRegion::Boundary,
                    (true, false) => TermRegion::BulkA,
                    _ => TermRegion::BulkB,
                }
            })
            .collect();
        let mut boundary_sites: Vec<usize> = self
            .boundary_terms()
            .flat_map(|t| t.support().iter().copied())
            .filter(|&s| bp.contains_a(s))
            .collect();
        boundary_sites.sort_unstable();
        boundary_sites.dedup();
        self.boundary_size = boundary_sites.len();
        self.max_boundary_norm = self
            .boundary_terms()
            .map(OperatorTerm::operator_norm)
            .fold(0.0, f64::max);
    }

    /// Same Hamiltonian with the roles of A and B exchanged.
    pub fn with_bipartition(&self, bipartition: Bipartition) -> Result<Self> {
        Self::new(self.lattice.clone(), self.terms.clone(), bipartition)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn bipartition(&self) -> &Bipartition {
        &self.bipartition
    }

    pub fn tags(&self) -> &[TermRegion] {
        &self.tags
    }

    /// Terms with their region tag.
    pub fn tagged_terms(&self) -> impl Iterator<Item = (&OperatorTerm, TermRegion)> {
        self.terms.iter().zip(self.tags.iter().copied())
    }

    pub fn terms_in(&self, region: TermRegion) -> impl Iterator<Item = &OperatorTerm> {
        self.tagged_terms()
            .filter(move |(_, r)| *r == region)
            .map(|(t, _)| t)
    }

    pub fn boundary_terms(&self) -> impl Iterator<Item = &OperatorTerm> {
        self.terms_in(TermRegion::Boundary)
    }

    pub fn has_boundary(&self) -> bool {
        self.tags.contains(&TermRegion::Boundary)
    }

    /// Number of distinct A sites touched by boundary terms.
    pub fn boundary_size(&self) -> usize {
        self.boundary_size
    }

    /// Largest operator norm among boundary terms (0 when there are none).
    pub fn max_boundary_norm(&self) -> f64 {
        self.max_boundary_norm
    }

    /// Total Hilbert space dimension `d^N`.
    pub fn dimension(&self) -> Result<usize> {
        checked_pow(self.lattice.local_dim(), self.lattice.num_sites())
    }
}

/// Dense Hermitian matrix in the A-major product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitianOperator {
    matrix: DMatrix<C64>,
}

impl DenseHermitianOperator {
    /// Checks squareness and Hermiticity relative to the largest entry.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::input("operator must be a nonempty square matrix"));
        }
        if !is_hermitian(&matrix, HERMITIAN_OPERATOR_TOL) {
            return Err(Error::input("operator is not Hermitian"));
        }
        Ok(Self { matrix })
    }

    pub fn from_real(rows: usize, data: &[f64]) -> Result<Self> {
        if rows == 0 || data.len() != rows * rows {
            return Err(Error::input("real matrix data has the wrong length"));
        }
        Self::new(DMatrix::from_row_iterator(
            rows,
            rows,
            data.iter().map(|&x| C64::from(x)),
        ))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |m - m†|` within `tol * max(1, max |m|)`.
pub(crate) fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

fn hermitian_operator_norm(m: &DMatrix<C64>) -> f64 {
    nalgebra::linalg::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, e| acc.max(e.abs()))
}

/// Single-qubit Pauli and identity matrices.
pub mod pauli {
    use nalgebra::DMatrix;

    use crate::C64;

    pub fn identity() -> DMatrix<C64> {
        DMatrix::identity(2, 2)
    }

    pub fn x() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[C64::ZERO, C64::ONE, C64::ONE, C64::ZERO])
    }

    pub fn y() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[C64::ZERO, -C64::I, C64::I, C64::ZERO])
    }

    pub fn z() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_qubit() -> HamiltonianSpec {
        let lattice = Lattice::chain(2, BoundaryCondition::Open);
        let terms = vec![
            OperatorTerm::one_site(0, -1.0, pauli::z()).unwrap(),
            OperatorTerm::one_site(1, -1.0, pauli::z()).unwrap(),
            OperatorTerm::two_site(0, 1, 1.0, pauli::x(), pauli::x()).unwrap(),
        ];
        HamiltonianSpec::new(lattice, terms, Bipartition::contiguous(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn classifies_two_qubit_terms() {
        let spec = two_qubit();
        assert_eq!(
            spec.tags(),
            &[TermRegion::BulkA, TermRegion::BulkB, TermRegion::Boundary]
        );
        assert_eq!(spec.boundary_size(), 1);
        assert!((spec.max_boundary_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decoupled_spec_has_empty_boundary() {
        let lattice = Lattice::chain(3, BoundaryCondition::Open);
        let terms = vec![
            OperatorTerm::two_site(0, 1, 1.0, pauli::z(), pauli::z()).unwrap(),
            OperatorTerm::one_site(2, 1.0, pauli::x()).unwrap(),
        ];
        let spec =
            HamiltonianSpec::new(lattice, terms, Bipartition::contiguous(3, 2).unwrap()).unwrap();
        assert_eq!(spec.boundary_terms().count(), 0);
        assert_eq!(spec.boundary_size(), 0);
        assert!(!spec.has_boundary());
    }

    #[test]
    fn eight_site_chain_has_single_boundary_bond() {
        let lattice = Lattice::chain(8, BoundaryCondition::Open);
        let mut terms = Vec::new();
        for i in 0..8 {
            terms.push(OperatorTerm::one_site(i, 1.0, pauli::z()).unwrap());
        }
        for i in 0..7 {
            terms.push(OperatorTerm::two_site(i, i + 1, 1.0, pauli::x(), pauli::x()).unwrap());
        }
        let spec =
            HamiltonianSpec::new(lattice, terms, Bipartition::contiguous(8, 4).unwrap()).unwrap();
        let boundary: Vec<_> = spec.boundary_terms().map(|t| t.support().to_vec()).collect();
        assert_eq!(boundary, vec![vec![3, 4]]);
        assert_eq!(spec.boundary_size(), 1);
        // tag partition
        let counts = [TermRegion::BulkA, TermRegion::BulkB, TermRegion::Boundary]
            .map(|r| spec.terms_in(r).count());
        assert_eq!(counts.iter().sum::<usize>(), spec.terms().len());
        assert_eq!(counts, [7, 7, 1]);
    }

    #[test]
    fn rejects_out_of_range_support() {
        let lattice = Lattice::chain(2, BoundaryCondition::Open);
        let terms = vec![OperatorTerm::one_site(5, 1.0, pauli::z()).unwrap()];
        let err = HamiltonianSpec::new(lattice, terms, Bipartition::contiguous(2, 1).unwrap());
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn rejects_bad_terms_and_partitions() {
        assert!(OperatorTerm::new(vec![0, 0], 1.0, vec![pauli::x(), pauli::x()]).is_err());
        let not_hermitian =
            DMatrix::from_row_slice(2, 2, &[C64::ZERO, C64::ONE, C64::ZERO, C64::ZERO]);
        assert!(OperatorTerm::one_site(0, 1.0, not_hermitian).is_err());
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[3]).is_err());
    }

    #[test]
    fn boundary_size_counts_distinct_a_sites() {
        // 2x2 open square, A = left column {0, 2}; bonds 0-1 and 2-3 cross.
        let lattice = Lattice::hypercubic(vec![2, 2], vec![BoundaryCondition::Open; 2]).unwrap();
        let terms: Vec<_> = lattice
            .bonds()
            .into_iter()
            .map(|(i, j)| OperatorTerm::two_site(i, j, 0.5, pauli::z(), pauli::z()).unwrap())
            .collect();
        let spec = HamiltonianSpec::new(lattice, terms, Bipartition::new(4, &[0, 2]).unwrap())
            .unwrap();
        assert_eq!(spec.boundary_terms().count(), 2);
        assert_eq!(spec.boundary_size(), 2);
        assert!((spec.max_boundary_norm() - 0.5).abs() < 1e-14);
    }
}
