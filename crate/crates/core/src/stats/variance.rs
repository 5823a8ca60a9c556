use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::anova::{check_groups, f_sf};
use super::{mean, median, unbiased_variance};
use crate::error::Result;
use crate::hypothesis::HypothesisTestResult;

/// Levene test plus the per-group standard-deviation intervals shown with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceTest {
    pub test: HypothesisTestResult,
    pub df_between: f64,
    pub df_within: f64,
    /// Bonferroni-adjusted `(lower, upper)` interval for each group's sd.
    pub std_ci: Vec<(f64, f64)>,
    /// Groups whose interval collapsed to a point (zero variance).
    pub degenerate_groups: Vec<usize>,
}

/// Confidence interval for a standard deviation at joint level `1 - alpha`
/// over `k` groups, from chi-square quantiles at `alpha / k`.
pub fn std_interval(variance: f64, n: usize, alpha: f64, k: usize) -> (f64, f64) {
    if n < 2 || variance <= 0.0 {
        let s = variance.max(0.0).sqrt();
        return (s, s);
    }
    let df = (n - 1) as f64;
    let a = alpha / k.max(1) as f64;
    let chi = ChiSquared::new(df).expect("df > 0");
    let upper_q = chi.inverse_cdf(1.0 - a / 2.0);
    let lower_q = chi.inverse_cdf(a / 2.0);
    (
        (df * variance / upper_q).sqrt(),
        (df * variance / lower_q).sqrt(),
    )
}

/// Brown-Forsythe variant of Levene's test: a one-way ANOVA on absolute
/// deviations from each group's median.
pub fn variance_test(groups: &[Vec<f64>], alpha: f64) -> Result<VarianceTest> {
    check_groups(groups)?;
    let k = groups.len();
    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = median(g);
            g.iter().map(|x| (x - m).abs()).collect()
        })
        .collect();
    let n_total: usize = z.iter().map(Vec::len).sum();
    let z_means: Vec<f64> = z.iter().map(|g| mean(g)).collect();
    let grand = z.iter().flatten().sum::<f64>() / n_total as f64;

    let between: f64 = z
        .iter()
        .zip(&z_means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let within: f64 = z
        .iter()
        .zip(&z_means)
        .map(|(g, m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();

    let df_between = (k - 1) as f64;
    let df_within = (n_total - k) as f64;
    let w = if within > 0.0 {
        (df_within / df_between) * between / within
    } else if between > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let p = f_sf(w, df_between, df_within)?;

    let mut std_ci = Vec::with_capacity(k);
    let mut degenerate_groups = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let var = unbiased_variance(g);
        if var <= 0.0 {
            degenerate_groups.push(i);
        }
        std_ci.push(std_interval(var, g.len(), alpha, k));
    }

    Ok(VarianceTest {
        test: HypothesisTestResult::exact(w, p, alpha, n_total),
        df_between,
        df_within,
        std_ci,
        degenerate_groups,
    })
}
