//! Small numerical helpers: Richardson-extrapolated finite differences and
//! linear least squares.

mod lsq;
mod richardson;

pub use lsq::{linear_least_squares, LinearFit};
pub use richardson::{
    central_first_derivative, central_second_derivative, richardson, richardson_weights, Extrapolation,
};
pub(crate) use richardson::halving_steps;

/// Pairwise (tree) summation with a fixed reduction order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(super::pairwise_sum(&v), 5050.0);
        assert_eq!(super::pairwise_sum(&[]), 0.0);
    }
}
