//! Built-in spin models. All use at most two-site terms on nearest-neighbour
//! bonds of the lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pauli, Bipartition, BoundaryCondition, HamiltonianSpec, Lattice, OperatorTerm};
use crate::error::Result;

/// Model family with its couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Model {
    /// `-J Σ Z_i Z_j - h Σ X_i - g Σ Z_i`.
    Tfim {
        #[serde(default = "one")]
        j: f64,
        h: f64,
        #[serde(default)]
        g: f64,
    },
    /// `J Σ (X_i X_j + Y_i Y_j + Δ Z_i Z_j) + h_z Σ Z_i`.
    Xxz {
        #[serde(default = "one")]
        j: f64,
        delta: f64,
        #[serde(default)]
        hz: f64,
    },
    /// Alternating XX+YY couplings `j1` (even bonds) and `j2` (odd bonds) on a
    /// chain, plus `h_z Σ Z_i`.
    Dimerized {
        j1: f64,
        j2: f64,
        #[serde(default)]
        hz: f64,
    },
    /// `-h Σ Z_i + J Σ X_i X_j`; on two sites this is `-Z_0 - Z_1 + X_0 X_1`.
    FieldXx {
        #[serde(default = "one")]
        h: f64,
        #[serde(default = "one")]
        j: f64,
    },
    /// Seeded random couplings in `[-1, 1]` on every site and bond.
    Random { seed: u64 },
}

fn one() -> f64 {
    1.0
}

impl Model {
    pub fn id(&self) -> &'static str {
        match self {
            Model::Tfim { .. } => "tfim",
            Model::Xxz { .. } => "xxz",
            Model::Dimerized { .. } => "dimerized",
            Model::FieldXx { .. } => "field_xx",
            Model::Random { .. } => "random",
        }
    }

    pub fn terms(&self, lattice: &Lattice) -> Result<Vec<OperatorTerm>> {
        let n = lattice.num_sites();
        let bonds = lattice.bonds();
        let mut terms = Vec::new();
        match *self {
            Model::Tfim { j, h, g } => {
                for &(a, b) in &bonds {
                    terms.push(OperatorTerm::two_site(a, b, -j, pauli::z(), pauli::z())?);
                }
                for s in 0..n {
                    terms.push(OperatorTerm::one_site(s, -h, pauli::x())?);
                    if g != 0.0 {
                        terms.push(OperatorTerm::one_site(s, -g, pauli::z())?);
                    }
                }
            }
            Model::Xxz { j, delta, hz } => {
                for &(a, b) in &bonds {
                    push_xy(&mut terms, a, b, j)?;
                    terms.push(OperatorTerm::two_site(a, b, j * delta, pauli::z(), pauli::z())?);
                }
                push_field(&mut terms, n, hz)?;
            }
            Model::Dimerized { j1, j2, hz } => {
                for &(a, b) in &bonds {
                    let coupling = if a.min(b) % 2 == 0 { j1 } else { j2 };
                    push_xy(&mut terms, a, b, coupling)?;
                }
                push_field(&mut terms, n, hz)?;
            }
            Model::FieldXx { h, j } => {
                for s in 0..n {
                    terms.push(OperatorTerm::one_site(s, -h, pauli::z())?);
                }
                for &(a, b) in &bonds {
                    terms.push(OperatorTerm::two_site(a, b, j, pauli::x(), pauli::x())?);
                }
            }
            Model::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut coupling = || rng.random_range(-1.0..=1.0);
                for s in 0..n {
                    terms.push(OperatorTerm::one_site(s, coupling(), pauli::x())?);
                    terms.push(OperatorTerm::one_site(s, coupling(), pauli::z())?);
                }
                for &(a, b) in &bonds {
                    for (p, q) in [
                        (pauli::x(), pauli::x()),
                        (pauli::y(), pauli::y()),
                        (pauli::z(), pauli::z()),
                        (pauli::x(), pauli::z()),
                        (pauli::z(), pauli::x()),
                    ] {
                        terms.push(OperatorTerm::two_site(a, b, coupling(), p, q)?);
                    }
                }
            }
        }
        Ok(terms)
    }

    pub fn build(&self, lattice: Lattice, bipartition: Bipartition) -> Result<HamiltonianSpec> {
        let terms = self.terms(&lattice)?;
        HamiltonianSpec::new(lattice, terms, bipartition)
    }
}

fn push_xy(terms: &mut Vec<OperatorTerm>, a: usize, b: usize, j: f64) -> Result<()> {
    terms.push(OperatorTerm::two_site(a, b, j, pauli::x(), pauli::x())?);
    terms.push(OperatorTerm::two_site(a, b, j, pauli::y(), pauli::y())?);
    Ok(())
}

fn push_field(terms: &mut Vec<OperatorTerm>, n: usize, hz: f64) -> Result<()> {
    if hz != 0.0 {
        for s in 0..n {
            terms.push(OperatorTerm::one_site(s, hz, pauli::z())?);
        }
    }
    Ok(())
}

/// `H(λ) = -Z_0 - Z_1 + λ X_0 X_1` with A = {0}: the smallest model with a
/// nontrivial boundary, solvable by hand.
pub fn two_qubit() -> HamiltonianSpec {
    Model::FieldXx { h: 1.0, j: 1.0 }
        .build(
            Lattice::chain(2, BoundaryCondition::Open),
            Bipartition::contiguous(2, 1).expect("valid cut"),
        )
        .expect("valid model")
}

/// Open transverse-field Ising chain `-Σ Z_i Z_{i+1} - h Σ X_i` cut at `cut`.
pub fn tfim_chain(n: usize, h: f64, cut: usize) -> Result<HamiltonianSpec> {
    Model::Tfim { j: 1.0, h, g: 0.0 }.build(
        Lattice::chain(n, BoundaryCondition::Open),
        Bipartition::contiguous(n, cut)?,
    )
}

/// Open chain with seeded random two-local couplings, cut at `cut`.
pub fn random_chain(n: usize, cut: usize, seed: u64) -> Result<HamiltonianSpec> {
    Model::Random { seed }.build(
        Lattice::chain(n, BoundaryCondition::Open),
        Bipartition::contiguous(n, cut)?,
    )
}
