use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Weighted linear least-squares fit with parameter uncertainties.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// One-sigma standard errors from `σ² (XᵀWX)⁻¹`, `σ² = RSS/(n-p)`.
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub r_squared: f64,
}

impl LinearFit {
    /// `|coefficient| / std_error` (infinite for an exact fit).
    pub fn t_statistic(&self, k: usize) -> f64 {
        let se = self.std_errors[k];
        if se == 0.0 {
            if self.coefficients[k] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.coefficients[k].abs() / se
        }
    }
}

/// Minimises `Σ w_i (y_i - (X β)_i)²`. Columns of `design` are the basis
/// functions; rank deficiency is a fit error.
pub fn linear_least_squares(
    design: &DMatrix<f64>,
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<LinearFit> {
    let (n, p) = design.shape();
    if y.len() != n {
        return Err(Error::Fit(format!("{} observations for {n} design rows", y.len())));
    }
    if n < p {
        return Err(Error::Fit(format!("{n} observations cannot determine {p} parameters")));
    }
    let w: Vec<f64> = match weights {
        Some(w) if w.len() == n && w.iter().all(|&x| x > 0.0 && x.is_finite()) => w.to_vec(),
        Some(_) => return Err(Error::Fit("weights must be positive and match the data".into())),
        None => vec![1.0; n],
    };
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let xw = DMatrix::from_fn(n, p, |i, j| design[(i, j)] * sw[i]);
    let yw = DVector::from_fn(n, |i, _| y[i] * sw[i]);

    // column scaling keeps the conditioning test meaningful for mixed units
    let col_norms: Vec<f64> = (0..p).map(|j| xw.column(j).norm()).collect();
    if col_norms.iter().any(|&c| c == 0.0) {
        return Err(Error::Fit("design matrix has a zero column".into()));
    }
    let xs = DMatrix::from_fn(n, p, |i, j| xw[(i, j)] / col_norms[j]);
    let svd = xs.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::Fit(format!(
            "rank-deficient design matrix (condition {:e})",
            smax / smin
        )));
    }
    let beta_scaled = svd
        .solve(&yw, 0.0)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let coefficients: Vec<f64> = (0..p).map(|j| beta_scaled[j] / col_norms[j]).collect();

    let fitted = design * DVector::from_column_slice(&coefficients);
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let rss: f64 = (0..n).map(|i| w[i] * residuals[i].powi(2)).sum();
    let wsum: f64 = w.iter().sum();
    let ymean = (0..n).map(|i| w[i] * y[i]).sum::<f64>() / wsum;
    let tss: f64 = (0..n).map(|i| w[i] * (y[i] - ymean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let dof = n - p;
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    // (XsᵀXs)⁻¹ = V Σ⁻² Vᵀ
    let v_t = svd.v_t.as_ref().expect("requested V");
    let std_errors = (0..p)
        .map(|j| {
            let var_scaled: f64 = (0..p)
                .map(|k| (v_t[(k, j)] / svd.singular_values[k]).powi(2))
                .sum();
            (sigma2 * var_scaled).sqrt() / col_norms[j]
        })
        .collect();
    Ok(LinearFit {
        coefficients,
        std_errors,
        residuals,
        rss,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let design = DMatrix::from_fn(4, 2, |i, j| if j == 0 { xs[i] } else { 1.0 });
        let y: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = linear_least_squares(&design, &y, None).unwrap();
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-12);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_error_of_slope() {
        // y = x + noise pattern; slope se = sqrt(σ² / Σ(x - x̄)²)
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let noise = [0.1, -0.1, 0.0, 0.1, -0.1];
        let y: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| x + e).collect();
        let design = DMatrix::from_fn(5, 2, |i, j| if j == 0 { xs[i] } else { 1.0 });
        let fit = linear_least_squares(&design, &y, None).unwrap();
        let sxx: f64 = xs.iter().map(|x| (x - 2.0).powi(2)).sum();
        let expected = (fit.rss / 3.0 / sxx).sqrt();
        assert!((fit.std_errors[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_error() {
        let design = DMatrix::from_fn(4, 2, |_, _| 1.0);
        assert!(matches!(
            linear_least_squares(&design, &[1.0, 2.0, 3.0, 4.0], None),
            Err(Error::Fit(_))
        ));
    }
}
