//! Entanglement susceptibility of the half-filled tight-binding model on a
//! hypercubic slab, cut perpendicular to axis `⊥`.
//!
//! Parallel momenta run over `2πm/L`, `m = 0..L-1`. Perpendicular momenta are
//! open-chain sine modes: `k⊥ = πm/L_B` on the B side and `q⊥ = πm/L_A` on the
//! A side, `m = 1..L-1`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{linear_least_squares, pairwise_sum};

/// Modes with `|ε| < ZERO_MODE_TOL` count as occupied.
pub const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filling {
    /// `n = θ(-ε)`.
    #[default]
    Half,
    /// Every mode occupied.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightBindingSpec {
    pub dim: usize,
    /// Parallel (periodic) length, ignored for `dim = 1`.
    pub l: usize,
    pub l_a: usize,
    pub l_b: usize,
    #[serde(default)]
    pub filling: Filling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightBindingResult {
    pub chi_e: f64,
    /// Grid modes with `|ε| < ZERO_MODE_TOL`, assigned `n = 1`.
    pub zero_modes: usize,
}

impl TightBindingSpec {
    pub fn new(dim: usize, l: usize, l_a: usize, l_b: usize) -> Result<Self> {
        let spec = Self {
            dim,
            l,
            l_a,
            l_b,
            filling: Filling::Half,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        if self.l_a < 2 || self.l_b < 2 || (self.dim > 1 && self.l < 2) {
            return Err(Error::input("lengths must be at least 2"));
        }
        Ok(())
    }

    fn occupation(&self, eps: f64) -> f64 {
        match self.filling {
            Filling::Full => 1.0,
            Filling::Half if eps < 0.0 || eps.abs() < ZERO_MODE_TOL => 1.0,
            Filling::Half => 0.0,
        }
    }

    /// `2 Σ cos k_∥` over every parallel momentum.
    fn parallel_energies(&self) -> Vec<f64> {
        let count = self.l.pow(self.dim as u32 - 1);
        (0..count)
            .map(|mut idx| {
                let mut e = 0.0;
                for _ in 1..self.dim {
                    e += 2.0 * (2.0 * PI * (idx % self.l) as f64 / self.l as f64).cos();
                    idx /= self.l;
                }
                e
            })
            .collect()
    }
}

fn perpendicular(width: usize) -> Vec<f64> {
    (1..width).map(|m| PI * m as f64 / width as f64).collect()
}

pub fn tight_binding_chi_e(spec: &TightBindingSpec) -> Result<TightBindingResult> {
    spec.validate()?;
    let parallel = spec.parallel_energies();
    let ks = perpendicular(spec.l_b);
    let qs = perpendicular(spec.l_a);
    let q_modes: Vec<(f64, f64)> = qs.iter().map(|q| (q.sin().powi(2), 2.0 * q.cos())).collect();

    let slices: Vec<f64> = ks
        .par_iter()
        .map(|&k| {
            let (sk, ck) = (k.sin().powi(2), 2.0 * k.cos());
            let mut terms = Vec::with_capacity(parallel.len() * q_modes.len());
            for &e in &parallel {
                let eps_k = e + ck;
                let nk = spec.occupation(eps_k);
                if nk == 0.0 {
                    continue;
                }
                for &(sq, cq) in &q_modes {
                    let eps_q = e + cq;
                    let holes = 1.0 - spec.occupation(eps_q);
                    let denom = eps_k - eps_q;
                    if holes == 0.0 || denom.abs() < ZERO_MODE_TOL {
                        continue;
                    }
                    terms.push(sk * sq * nk * holes / (denom * denom));
                }
            }
            pairwise_sum(&terms)
        })
        .collect();

    let zero_modes = if spec.filling == Filling::Half {
        let count = |grid: &[f64]| {
            grid.iter()
                .map(|p| {
                    parallel
                        .iter()
                        .filter(|&&e| (e + 2.0 * p.cos()).abs() < ZERO_MODE_TOL)
                        .count()
                })
                .sum::<usize>()
        };
        count(&ks) + count(&qs)
    } else {
        0
    };
    Ok(TightBindingResult {
        chi_e: 8.0 / (spec.l_a * spec.l_b) as f64 * pairwise_sum(&slices),
        zero_modes,
    })
}

/// `Ξ(k⊥, q⊥) = (2π/L)^{d-1} Σ_{k∥} n(k∥, k⊥) (1 - n(k∥, q⊥))`.
pub fn xi_profile(spec: &TightBindingSpec, k_perp: f64, q_perp: f64) -> Result<f64> {
    spec.validate()?;
    let parallel = spec.parallel_energies();
    let terms: Vec<f64> = parallel
        .iter()
        .map(|&e| spec.occupation(e + 2.0 * k_perp.cos()) * (1.0 - spec.occupation(e + 2.0 * q_perp.cos())))
        .collect();
    let measure = (2.0 * PI / spec.l as f64).powi(spec.dim as i32 - 1);
    Ok(measure * pairwise_sum(&terms))
}

/// Fit of `χ_E(L)`: `a ln L + b` in one dimension, `a L^{d-1} ln L + b L^{d-1} + c`
/// above. In one dimension `L^{d-1} = 1`, so `b` and `c` merge and `c` is 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFitResult {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_std_error: f64,
    pub b_std_error: f64,
    pub c_std_error: f64,
    pub rss: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl ScalingFitResult {
    /// `|a| / σ_a`.
    pub fn a_significance(&self) -> f64 {
        if self.a_std_error == 0.0 {
            if self.a == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.a.abs() / self.a_std_error
        }
    }
}

pub fn scaling_fit(points: &[(f64, f64)], dim: usize, weights: Option<&[f64]>) -> Result<ScalingFitResult> {
    if points.len() < 5 {
        return Err(Error::Fit(format!("{} points, need at least 5", points.len())));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) || points[0].0 <= 1.0 {
        return Err(Error::Fit("sizes must be ascending and above 1".into()));
    }
    if dim == 0 {
        return Err(Error::Fit("dimension must be at least 1".into()));
    }
    let cols = if dim == 1 { 2 } else { 3 };
    let design = DMatrix::from_fn(points.len(), cols, |i, j| {
        let l = points[i].0;
        let area = l.powi(dim as i32 - 1);
        match j {
            0 => area * l.ln(),
            1 => area,
            _ => 1.0,
        }
    });
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = linear_least_squares(&design, &y, weights)?;
    let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    Ok(ScalingFitResult {
        dim,
        a: fit.coefficients[0],
        b: fit.coefficients[1],
        c: get(&fit.coefficients, 2),
        a_std_error: fit.std_errors[0],
        b_std_error: fit.std_errors[1],
        c_std_error: get(&fit.std_errors, 2),
        rss: fit.rss,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_one_dimensional_case() {
        // L_A = L_B = 2: k = q = π/2, both zero modes, so no particle-hole pair
        let r = tight_binding_chi_e(&TightBindingSpec::new(1, 4, 2, 2).unwrap()).unwrap();
        assert_eq!(r.chi_e, 0.0);
        assert_eq!(r.zero_modes, 2);
        // L_A = 2, L_B = 3: k ∈ {π/3, 2π/3}, q = π/2 filled; nothing empty on A
        let r = tight_binding_chi_e(&TightBindingSpec::new(1, 5, 2, 3).unwrap()).unwrap();
        assert_eq!(r.chi_e, 0.0);
        // L_A = 3, L_B = 2: k = π/2 (filled, ε = 0), q = π/3 empty (ε = 1)
        // χ_E = 8/6 · sin²(π/2) sin²(π/3) / 1² = 8/6 · 3/4 = 1
        let r = tight_binding_chi_e(&TightBindingSpec::new(1, 5, 3, 2).unwrap()).unwrap();
        assert!((r.chi_e - 1.0).abs() < 1e-12, "{}", r.chi_e);
    }

    #[test]
    fn full_filling_has_no_pairs() {
        let mut spec = TightBindingSpec::new(2, 8, 5, 5).unwrap();
        spec.filling = Filling::Full;
        assert_eq!(tight_binding_chi_e(&spec).unwrap().chi_e, 0.0);
        assert_eq!(xi_profile(&spec, 1.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn region_exchange_symmetry_without_zero_modes() {
        for (l_a, l_b) in [(5, 9), (7, 13), (11, 3)] {
            let a = tight_binding_chi_e(&TightBindingSpec::new(1, 0, l_a, l_b).unwrap()).unwrap();
            let b = tight_binding_chi_e(&TightBindingSpec::new(1, 0, l_b, l_a).unwrap()).unwrap();
            assert_eq!(a.zero_modes, 0);
            assert!((a.chi_e - b.chi_e).abs() <= 1e-10 * a.chi_e, "{l_a} {l_b}");
        }
        // particle-hole maps k∥ to k∥ + π, which needs an even parallel length
        for l in [6, 8] {
            let a = tight_binding_chi_e(&TightBindingSpec::new(2, l, 5, 7).unwrap()).unwrap();
            let b = tight_binding_chi_e(&TightBindingSpec::new(2, l, 7, 5).unwrap()).unwrap();
            assert_eq!(a.zero_modes, 0);
            assert!((a.chi_e - b.chi_e).abs() <= 1e-10 * a.chi_e, "{} {}", a.chi_e, b.chi_e);
        }
    }

    #[test]
    fn xi_vanishes_on_the_diagonal() {
        let spec = TightBindingSpec::new(2, 64, 32, 32).unwrap();
        for k in [0.3, 1.2, 2.5] {
            assert_eq!(xi_profile(&spec, k, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn exact_model_recovery() {
        let pts: Vec<(f64, f64)> = [16.0, 24.0, 32.0, 48.0, 64.0, 96.0]
            .iter()
            .map(|&l: &f64| (l, 0.7 * l * l.ln() - 1.3 * l + 2.5))
            .collect();
        let f = scaling_fit(&pts, 2, None).unwrap();
        assert!((f.a - 0.7).abs() < 1e-10 && (f.b + 1.3).abs() < 1e-10 && (f.c - 2.5).abs() < 1e-9);
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&l| (l, 3.0)).collect();
        let f = scaling_fit(&pts, 1, None).unwrap();
        assert!(f.a.abs() < 1e-12);
        assert!(scaling_fit(&pts[..4], 1, None).is_err());
    }
}
