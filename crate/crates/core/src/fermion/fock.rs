//! Brute-force many-body oracle in the occupation-number basis.
//!
//! Basis index bit `N-1-i` holds the occupation of mode `i`, so mode 0 is the
//! most significant digit. Fermionic signs follow the mode order.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use super::check_symmetric;
use crate::error::{Error, Result};

pub const MAX_FOCK_MODES: usize = 12;
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FockGroundState {
    pub energy: f64,
    pub particles: usize,
    /// Amplitudes over all `2^N` occupation states.
    pub state: DVector<f64>,
}

fn occupied(s: usize, mode: usize, n: usize) -> bool {
    (s >> (n - 1 - mode)) & 1 == 1
}

/// `(-1)` to the number of occupied modes before `mode`.
fn sign_before(s: usize, mode: usize, n: usize) -> f64 {
    let higher = s >> (n - mode);
    if higher.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ Z_ij c_i† c_j` restricted to states with `particles` occupied modes.
fn sector(z: &DMatrix<f64>, particles: usize) -> (Vec<usize>, DMatrix<f64>) {
    let n = z.nrows();
    let basis: Vec<usize> = (0..1usize << n)
        .filter(|s| s.count_ones() as usize == particles)
        .collect();
    let mut index = vec![usize::MAX; 1 << n];
    for (k, &s) in basis.iter().enumerate() {
        index[s] = k;
    }
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    for (col, &s) in basis.iter().enumerate() {
        for j in (0..n).filter(|&j| occupied(s, j, n)) {
            let bit_j = 1 << (n - 1 - j);
            let s1 = s ^ bit_j;
            let sign_j = sign_before(s, j, n);
            for i in 0..n {
                if z[(i, j)] == 0.0 || occupied(s1, i, n) {
                    continue;
                }
                let s2 = s1 | (1 << (n - 1 - i));
                h[(index[s2], col)] += z[(i, j)] * sign_j * sign_before(s1, i, n);
            }
        }
    }
    (basis, h)
}

/// Ground state of `Σ Z_ij c_i† c_j` by diagonalising every particle-number
/// sector.
pub fn fock_ground_state(z: &DMatrix<f64>) -> Result<FockGroundState> {
    check_symmetric(z, "Z")?;
    let n = z.nrows();
    if n > MAX_FOCK_MODES {
        return Err(Error::Capacity {
            dimension: 1 << n,
            cap: 1 << MAX_FOCK_MODES,
        });
    }
    let mut levels: Vec<(f64, usize, usize)> = Vec::new();
    let mut best: Option<(f64, usize, Vec<usize>, DVector<f64>)> = None;
    for particles in 0..=n {
        let (basis, h) = sector(z, particles);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..basis.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for &k in order.iter().take(2) {
            levels.push((eig.eigenvalues[k], particles, k));
        }
        let e = eig.eigenvalues[order[0]];
        if best.as_ref().map_or(true, |b| e < b.0) {
            best = Some((e, particles, basis, eig.eigenvectors.column(order[0]).into_owned()));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = z.amax().max(f64::MIN_POSITIVE) * n as f64;
    let splitting = levels[1].0 - levels[0].0;
    if splitting < DEGENERACY_TOL * scale {
        return Err(Error::DegenerateGroundState {
            splitting,
            tolerance: DEGENERACY_TOL * scale,
        });
    }
    let (energy, particles, basis, v) = best.expect("at least one sector");
    let mut state = DVector::zeros(1 << n);
    for (k, &s) in basis.iter().enumerate() {
        state[s] = v[k];
    }
    Ok(FockGroundState {
        energy,
        particles,
        state,
    })
}

/// `Tr ρ_A²` for the first `modes_a` modes.
pub fn fock_reduced_purity(state: &DVector<f64>, modes_a: usize, modes: usize) -> Result<f64> {
    if state.len() != 1 << modes || modes_a == 0 || modes_a >= modes {
        return Err(Error::input("state length or region size inconsistent"));
    }
    let m = DMatrix::from_row_slice(1 << modes_a, 1 << (modes - modes_a), state.as_slice());
    let rho = &m * m.transpose();
    Ok(rho.norm_squared())
}

/// `|det(Φᵀ Φ')|` over the occupied single-particle orbitals of `Z` and `Z'`.
pub fn slater_overlap(z: &DMatrix<f64>, z_prime: &DMatrix<f64>) -> Result<f64> {
    let occupied_orbitals = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        check_symmetric(m, "Z")?;
        let eig = SymmetricEigen::new(m.clone());
        let cols: Vec<usize> = (0..m.nrows()).filter(|&k| eig.eigenvalues[k] < 0.0).collect();
        Ok(DMatrix::from_fn(m.nrows(), cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]))
    };
    let phi = occupied_orbitals(z)?;
    let phi_prime = occupied_orbitals(z_prime)?;
    if phi.ncols() != phi_prime.ncols() {
        return Ok(0.0);
    }
    if phi.ncols() == 0 {
        return Ok(1.0);
    }
    Ok((phi.transpose() * phi_prime).determinant().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn single_occupied_mode() {
        let z = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let g = fock_ground_state(&z).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.particles, 1);
        // mode 0 occupied: binary 10
        assert!((g.state[2].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ground_energy_is_sum_of_negative_levels() {
        for seed in 0..5 {
            let z = random_symmetric(8, seed);
            let expected: f64 = z
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .filter(|&&e| e < 0.0)
                .sum();
            let g = fock_ground_state(&z).unwrap();
            assert!((g.energy - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn many_body_overlap_matches_determinant() {
        for seed in 0..5 {
            let z = random_symmetric(7, 40 + seed);
            let z2 = &z + random_symmetric(7, 80 + seed) * 0.2;
            let a = fock_ground_state(&z).unwrap();
            let b = fock_ground_state(&z2).unwrap();
            let direct = a.state.dot(&b.state).abs();
            assert!((direct - slater_overlap(&z, &z2).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn anticommutation_signs_in_hopping() {
        // hopping 0 <-> 2 across an occupied mode 1 picks up a minus sign
        let mut z = DMatrix::zeros(3, 3);
        z[(0, 2)] = 1.0;
        z[(2, 0)] = 1.0;
        let (basis, h) = sector(&z, 2);
        let k = |s: usize| basis.iter().position(|&b| b == s).unwrap();
        // |110⟩ (modes 0,1) <- |011⟩ (modes 1,2)
        assert_eq!(h[(k(0b110), k(0b011))], -1.0);
        // with mode 1 empty: |100⟩ <-> |001⟩ has no sign
        let (basis, h) = sector(&z, 1);
        let k = |s: usize| basis.iter().position(|&b| b == s).unwrap();
        assert_eq!(h[(k(0b100), k(0b001))], 1.0);
    }

    #[test]
    fn capacity_and_degeneracy() {
        assert!(matches!(
            fock_ground_state(&DMatrix::identity(13, 13)),
            Err(Error::Capacity { .. })
        ));
        let z = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            fock_ground_state(&z),
            Err(Error::DegenerateGroundState { .. })
        ));
    }
}
