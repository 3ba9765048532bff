//! Sample summaries and the one-sample Kolmogorov–Smirnov statistic.

use alloc::vec::Vec;

use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean, `sd / sqrt(n)`.
    pub se_mean: f64,
    /// Large-sample standard error of the variance, `sqrt((m4 - s⁴) / n)`.
    pub se_variance: f64,
}

/// Two-pass summary; `None` for fewer than two values.
pub fn summarize(values: &[f64]) -> Option<SampleSummary> {
    let count = values.len();
    if count < 2 {
        return None;
    }
    let n = count as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), v| {
        let d2 = (v - mean) * (v - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let variance = m2 / (n - 1.0);
    let fourth = m4 / n;
    let se_mean = sqrt(variance / n);
    let se_variance = sqrt(((fourth - variance * variance) / n).max(0.0));
    Some(SampleSummary { count, mean, variance, se_mean, se_variance })
}

/// `sup_x |F_n(x) - F(x)|` for the sample against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted: Vec<f64> = sample.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic, `1.628 / sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / sqrt(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(summarize(&[1.0]).is_none());
    }

    #[test]
    fn ks_of_uniform_grid() {
        // Midpoints of n cells against U(0,1): distance is exactly 1/(2n).
        let n = 50;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0 + 0.2).collect();
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) > 0.19);
    }
}
