//! Small statistics helpers for the sampled checks.

/// Pearson chi-square statistic of `counts` against the uniform law.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return 0.0;
    }
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Mean plus three standard deviations of a chi-square variable with `df`
/// degrees of freedom.
pub fn chi_square_3sigma(df: usize) -> f64 {
    df as f64 + 3.0 * (2.0 * df as f64).sqrt()
}

/// Uniformity is not rejected when the statistic stays under the 3σ line.
pub fn uniform_not_rejected(counts: &[u64]) -> bool {
    counts.len() < 2 || chi_square_uniform(counts) <= chi_square_3sigma(counts.len() - 1)
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sigma(trials: u64, p: f64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_values() {
        assert_eq!(chi_square_uniform(&[10, 10, 10]), 0.0);
        // expected 10 each: (5² + 5²)/10
        assert!((chi_square_uniform(&[15, 5]) - 5.0).abs() < 1e-12);
        assert!(uniform_not_rejected(&[52, 48]));
        assert!(!uniform_not_rejected(&[100, 0]));
        assert!((chi_square_3sigma(2) - 8.0).abs() < 1e-12);
    }
}
