//! Seeded random instances for property runs.
//!
//! Couplings are uniform in `[-1, 1]`. Spin specs whose bulk gap falls below
//! [`GAP_FLOOR`] are reported as gapless rather than used for bound checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::models::random_chain;
use crate::hamiltonian::HamiltonianSpec;
use crate::solver::SolverOptions;
use crate::susceptibility::{perturbation_amplitudes, PerturbationAmplitudes};

pub const GAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub label: String,
    pub spec: HamiltonianSpec,
}

/// `count` random open chains with `2..=max_sites` sites and a random cut.
pub fn random_spin_corpus(seed: u64, count: usize, max_sites: usize) -> Result<Vec<CorpusEntry>> {
    if max_sites < 2 {
        return Err(Error::input("corpus needs at least 2 sites"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(2..=max_sites);
            let cut = rng.random_range(1..n);
            let model_seed: u64 = rng.random();
            Ok(CorpusEntry {
                label: format!("random#{i}(n={n},cut={cut},seed={model_seed})"),
                spec: random_chain(n, cut, model_seed)?,
            })
        })
        .collect()
}

/// Amplitudes of a gapped spec, or `None` when the bulk Hamiltonian is
/// degenerate or its gap is below [`GAP_FLOOR`].
pub fn gapped_amplitudes(spec: &HamiltonianSpec, opts: &SolverOptions) -> Result<Option<PerturbationAmplitudes>> {
    match perturbation_amplitudes(spec, opts) {
        Ok(a) if a.gap() >= GAP_FLOOR => Ok(Some(a)),
        Ok(_) | Err(Error::DegenerateGroundState { .. }) | Err(Error::Gapless(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..=1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Block-diagonal `Z = Z_A ⊕ Z_B` on `modes` modes split in half, and a
/// boundary coupling `δZ` between the last two modes of A and the first two
/// of B.
pub fn random_fermion_instance(seed: u64, modes: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    assert!(modes >= 4, "need at least two modes per side");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = modes / 2;
    let mut z = DMatrix::zeros(modes, modes);
    z.view_mut((0, 0), (half, half)).copy_from(&random_symmetric(&mut rng, half));
    z.view_mut((half, half), (modes - half, modes - half))
        .copy_from(&random_symmetric(&mut rng, modes - half));
    let mut dz = DMatrix::zeros(modes, modes);
    for i in half - 2..half {
        for j in half..half + 2 {
            let v = rng.random_range(-1.0..=1.0);
            dz[(i, j)] = v;
            dz[(j, i)] = v;
        }
    }
    (z, dz)
}

/// Random positive-definite `V` and a symmetric `δV` with `V ± δV ≻ 0`.
pub fn random_boson_instance(seed: u64, modes: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(modes, modes, |_, _| rng.random_range(-1.0..=1.0));
    let v = &a * a.transpose() + DMatrix::identity(modes, modes);
    let dv = random_symmetric(&mut rng, modes);
    let scale = dv.clone().symmetric_eigenvalues().amax();
    // λ_min(V) ≥ 1, so ‖δV‖ ≤ 1/2 keeps both V ± δV positive
    let dv = if scale > 0.0 { dv * (0.5 / scale) } else { dv };
    (v, dv)
}
