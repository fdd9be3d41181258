use crate::error::Result;

/// Result of Richardson extrapolation over a sequence of step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// Difference between the last two extrapolation levels.
    pub error_estimate: f64,
    /// Whether the raw sequence approached its limit monotonically.
    pub monotone: bool,
    /// Raw estimates in step order.
    pub raw: Vec<f64>,
}

/// Extrapolates `A(h) = A + c₁ h^p + c₂ h^{p+q} + ...` to `h → 0`.
///
/// `samples` are `(h, A(h))` with strictly decreasing `h`. Each level removes
/// the next power of the error expansion.
pub fn richardson(samples: &[(f64, f64)], p: f64, q: f64) -> Extrapolation {
    assert!(!samples.is_empty(), "richardson needs at least one sample");
    let raw: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = samples.len();
    // table[i] holds the current-level estimate ending at step i
    let mut table = raw.clone();
    let mut previous_best = raw[n - 1];
    let mut best = raw[n - 1];
    for level in 1..n {
        let power = p + (level - 1) as f64 * q;
        for i in (level..n).rev() {
            let ratio = (samples[i - 1].0 / samples[i].0).powf(power);
            table[i] = table[i] + (table[i] - table[i - 1]) / (ratio - 1.0);
        }
        previous_best = best;
        best = table[n - 1];
    }
    let diffs: Vec<f64> = raw.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = diffs.iter().all(|&d| d >= 0.0) || diffs.iter().all(|&d| d <= 0.0);
    Extrapolation {
        value: best,
        error_estimate: (best - previous_best).abs(),
        monotone,
        raw,
    }
}

/// Weights `w` with `Σ w_i A(h_i)` equal to the Richardson limit; the
/// extrapolation is linear in the samples, so this also serves vector- or
/// matrix-valued data.
pub fn richardson_weights(steps: &[f64], p: f64, q: f64) -> Vec<f64> {
    (0..steps.len())
        .map(|k| {
            let samples: Vec<(f64, f64)> = steps
                .iter()
                .enumerate()
                .map(|(i, &h)| (h, if i == k { 1.0 } else { 0.0 }))
                .collect();
            richardson(&samples, p, q).value
        })
        .collect()
}

pub(crate) fn halving_steps(h0: f64, levels: usize) -> Vec<f64> {
    (0..=levels).map(|k| h0 / f64::powi(2.0, k as i32)).collect()
}

/// `f''(0)` by central differences at `h0, h0/2, ...` with `levels` Richardson
/// levels. `f0` is `f(0)`, passed in to avoid recomputation.
pub fn central_second_derivative<F>(mut f: F, f0: f64, h0: f64, levels: usize) -> Result<Extrapolation>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut samples = Vec::new();
    for h in halving_steps(h0, levels) {
        let d = (f(h)? + f(-h)? - 2.0 * f0) / (h * h);
        samples.push((h, d));
    }
    Ok(richardson(&samples, 2.0, 2.0))
}

/// `f'(0)` by central differences with Richardson extrapolation.
pub fn central_first_derivative<F>(mut f: F, h0: f64, levels: usize) -> Result<Extrapolation>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut samples = Vec::new();
    for h in halving_steps(h0, levels) {
        samples.push((h, (f(h)? - f(-h)?) / (2.0 * h)));
    }
    Ok(richardson(&samples, 2.0, 2.0))
}
