//! Small descriptive statistics shared by the trace and season summaries.

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with `n - 1` denominator; `0` when fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Nearest-rank quantile of an ascending-sorted slice: the order statistic at
/// 1-based rank `ceil(p * n)`, clamped to `[1, n]`. No interpolation.
///
/// Panics on an empty slice.
pub fn nearest_rank<T: Copy>(sorted: &[T], p: f64) -> T {
    assert!(!sorted.is_empty(), "nearest_rank of empty slice");
    let n = sorted.len();
    // The slack keeps products like 0.05 * 1000 from rounding up a rank.
    let rank = (p * n as f64 - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Sorts a copy and returns the nearest-rank quantiles for each `p`.
pub fn quantiles(xs: &[f64], ps: &[f64]) -> Vec<f64> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    ps.iter().map(|&p| nearest_rank(&sorted, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_small_cases() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(nearest_rank(&xs, 0.0), 1.0);
        assert_eq!(nearest_rank(&xs, 0.05), 1.0);
        assert_eq!(nearest_rank(&xs, 0.2), 1.0);
        assert_eq!(nearest_rank(&xs, 0.21), 2.0);
        assert_eq!(nearest_rank(&xs, 0.95), 5.0);
        assert_eq!(nearest_rank(&xs, 1.0), 5.0);
    }

    #[test]
    fn variance_of_short_slices() {
        assert_eq!(sample_variance(&[]), 0.0);
        assert_eq!(sample_variance(&[3.0]), 0.0);
        assert!((sample_variance(&[1.0, 3.0]) - 2.0).abs() < 1e-15);
    }
}
