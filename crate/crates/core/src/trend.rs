//! Blow-up detection for depth-indexed sequences.

/// Number of trailing refinement steps inspected by [`blows_up`].
pub const TREND_STEPS: usize = 4;

/// A sequence blows up when its last value exceeds `threshold`, or when its
/// last [`TREND_STEPS`] steps are strictly increasing with non-decreasing
/// increments and the final increment is at least `min_step`.
pub fn blows_up(seq: &[f64], threshold: f64, min_step: f64) -> bool {
    let Some(&last) = seq.last() else { return false };
    if !last.is_finite() || last > threshold {
        return true;
    }
    if seq.len() < TREND_STEPS + 1 {
        return false;
    }
    let tail = &seq[seq.len() - TREND_STEPS - 1..];
    let steps: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    steps.iter().all(|&d| d > 0.0)
        && steps.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
        && *steps.last().unwrap() >= min_step
}
