//! Lanczos iteration for the lowest eigenpair of a Hermitian operator, with
//! full reorthogonalisation and optional deflation against known vectors.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinearOperator, SolverOptions};
use crate::error::{Error, Result};
use crate::C64;

const START_SEED: u64 = 0x1a2c_05e5;
const CHECK_EVERY: usize = 4;

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: DVector<C64>,
    /// `‖A x - θ x‖` of the returned Ritz pair.
    pub residual: f64,
    /// Largest `|θ|` seen; a lower bound on `‖A‖` used for relative tolerances.
    pub spectral_estimate: f64,
    pub iterations: usize,
}

fn project_out(w: &mut DVector<C64>, basis: &[DVector<C64>]) {
    for v in basis {
        let c = v.dotc(w);
        w.axpy(-c, v, C64::ONE);
    }
}

fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
}

fn lowest_index(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap()
}

/// Lowest eigenpair of `op` restricted to the orthogonal complement of
/// `deflate` (which must be orthonormal).
pub fn lanczos_lowest(
    op: &dyn LinearOperator,
    deflate: &[DVector<C64>],
    opts: &SolverOptions,
) -> Result<LanczosResult> {
    let n = op.dim();
    if deflate.len() >= n {
        return Err(Error::input("deflation space covers the whole operator"));
    }
    // a fresh start per deflation depth: reusing the ground-state run's start
    // vector would hide any degenerate partner of the deflated vectors
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED.wrapping_add(deflate.len() as u64));
    let mut start = DVector::from_fn(n, |_, _| C64::from(rng.random_range(-1.0..1.0)));
    project_out(&mut start, deflate);
    let mut spectral_estimate: f64 = 0.0;
    let mut iterations = 0;
    let mut best: Option<LanczosResult> = None;

    for _cycle in 0..=opts.max_restarts {
        let norm = start.norm();
        if norm == 0.0 {
            return Err(Error::NumericalConsistency(
                "Lanczos start vector vanished".into(),
            ));
        }
        let m = opts.krylov_dim.max(2).min(n - deflate.len());
        let mut basis: Vec<DVector<C64>> = vec![start.unscale(norm)];
        let mut alphas = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);

        for k in 0..m {
            let mut w = op.apply_vec(&basis[k]);
            iterations += 1;
            project_out(&mut w, deflate);
            let alpha = basis[k].dotc(&w).re;
            alphas.push(alpha);
            w.axpy(-C64::from(alpha), &basis[k], C64::ONE);
            if k > 0 {
                w.axpy(-C64::from(betas[k - 1]), &basis[k - 1], C64::ONE);
            }
            for _ in 0..2 {
                project_out(&mut w, &basis);
                project_out(&mut w, deflate);
            }
            let beta = w.norm();
            let last = k + 1 == m;
            if last || (k + 1) % CHECK_EVERY == 0 || beta <= 1e-12 * spectral_estimate.max(alpha.abs()) {
                let (values, vectors) = tridiagonal_eigen(&alphas, &betas);
                let scale = values.iter().fold(spectral_estimate, |a, v| a.max(v.abs()));
                spectral_estimate = scale;
                let i0 = lowest_index(&values);
                let estimate = beta * vectors[(k, i0)].abs();
                if last || estimate <= opts.residual_tol * scale.max(1e-300) || beta <= 1e-14 * scale
                {
                    break;
                }
            }
            betas.push(beta);
            basis.push(w.unscale(beta));
        }

        let (values, vectors) = tridiagonal_eigen(&alphas, &betas[..alphas.len() - 1]);
        let i0 = lowest_index(&values);
        let theta = values[i0];
        let mut x = DVector::<C64>::zeros(n);
        for (j, v) in basis.iter().take(alphas.len()).enumerate() {
            x.axpy(C64::from(vectors[(j, i0)]), v, C64::ONE);
        }
        project_out(&mut x, deflate);
        let xn = x.norm();
        x.unscale_mut(xn);
        let mut r = op.apply_vec(&x);
        project_out(&mut r, deflate);
        r.axpy(-C64::from(theta), &x, C64::ONE);
        let residual = r.norm();
        let result = LanczosResult {
            value: theta,
            vector: x.clone(),
            residual,
            spectral_estimate,
            iterations,
        };
        let converged = residual <= opts.residual_tol * spectral_estimate.max(1e-300);
        if best.as_ref().map_or(true, |b| residual < b.residual) {
            best = Some(result);
        }
        if converged {
            break;
        }
        start = x;
    }
    let best = best.expect("at least one Lanczos cycle");
    // Accept slightly looser residuals after exhausting restarts, but flag
    // anything that is clearly unconverged.
    if best.residual > 1e3 * opts.residual_tol * best.spectral_estimate.max(1e-300) {
        return Err(Error::NumericalConsistency(format!(
            "Lanczos did not converge: residual {:e}",
            best.residual
        )));
    }
    Ok(best)
}
