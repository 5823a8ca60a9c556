use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{GroupKey, GroupStats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnovaMethod {
    Classic,
    Welch,
}

impl std::fmt::Display for AnovaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            AnovaMethod::Classic => "classic",
            AnovaMethod::Welch => "welch",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub method: AnovaMethod,
    pub f_statistic: f64,
    pub df_between: f64,
    /// Fractional for Welch.
    pub df_within: f64,
    pub p_value: f64,
    pub group_stats: Vec<GroupStats>,
    /// Group keys by descending mean; ties keep input order.
    pub ordering: Vec<GroupKey>,
    /// Set when the statistic is undefined (no spread at all).
    pub degenerate: bool,
}

impl AnovaResult {
    /// Ordering rendered as e.g. `B>A>C>D`.
    pub fn ordering_string(&self) -> String {
        self.ordering
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(">")
    }
}

/// Upper tail of the F distribution.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> Result<f64> {
    if f.is_nan() {
        return Err(Error::Degenerate("F statistic is NaN".into()));
    }
    if f <= 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let dist = FisherSnedecor::new(d1, d2).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(dist.sf(f).clamp(0.0, 1.0))
}

pub(crate) fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::Data(format!(
                "group {i} has {} observations, need at least 2",
                g.len()
            )));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "group {i} has non-finite scores"
            )));
        }
    }
    Ok(())
}

pub(crate) fn ordering(stats: &[GroupStats]) -> Vec<GroupKey> {
    let mut idx: Vec<usize> = (0..stats.len()).collect();
    idx.sort_by(|&a, &b| stats[b].mean.total_cmp(&stats[a].mean));
    idx.into_iter().map(|i| stats[i].key).collect()
}

fn group_stats(groups: &[Vec<f64>], alpha: f64) -> Vec<GroupStats> {
    let k = groups.len();
    groups
        .iter()
        .enumerate()
        .map(|(i, g)| GroupStats::compute(GroupKey::Index(i), g, alpha, k))
        .collect()
}

/// Equal-variance one-way ANOVA, `F = MS_between / MS_within`.
pub fn anova_classic(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    anova_classic_at(groups, super::DEFAULT_ALPHA)
}

pub(crate) fn anova_classic_at(groups: &[Vec<f64>], alpha: f64) -> Result<AnovaResult> {
    check_groups(groups)?;
    let stats = group_stats(groups, alpha);
    let k = groups.len();
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n_total as f64;

    let ss_between: f64 = stats
        .iter()
        .map(|s| s.n as f64 * (s.mean - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&stats)
        .map(|(g, s)| g.iter().map(|x| (x - s.mean).powi(2)).sum::<f64>())
        .sum();

    let df_between = (k - 1) as f64;
    let df_within = (n_total - k) as f64;
    let (f, degenerate) = if ss_within > 0.0 {
        ((ss_between / df_between) / (ss_within / df_within), false)
    } else if ss_between > 0.0 {
        (f64::INFINITY, false)
    } else {
        (0.0, true)
    };
    let p_value = f_sf(f, df_between, df_within)?;

    Ok(AnovaResult {
        method: AnovaMethod::Classic,
        f_statistic: f,
        df_between,
        df_within,
        p_value,
        ordering: ordering(&stats),
        group_stats: stats,
        degenerate,
    })
}

/// Welch's heteroscedastic one-way ANOVA.
///
/// Weights `w_i = n_i / s_i^2`; the denominator degrees of freedom follow
/// the Welch-Satterthwaite approximation `(k^2 - 1) / (3 sum (1 - w_i/W)^2 / (n_i - 1))`.
pub fn anova_welch(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    anova_welch_at(groups, super::DEFAULT_ALPHA)
}

pub(crate) fn anova_welch_at(groups: &[Vec<f64>], alpha: f64) -> Result<AnovaResult> {
    check_groups(groups)?;
    let stats = group_stats(groups, alpha);
    if let Some(s) = stats.iter().find(|s| s.variance <= 0.0) {
        return Err(Error::Degenerate(format!(
            "group {} has zero variance; Welch weights are undefined",
            s.key
        )));
    }
    let k = groups.len() as f64;
    let w: Vec<f64> = stats.iter().map(|s| s.n as f64 / s.variance).collect();
    let w_sum: f64 = w.iter().sum();
    let weighted_mean = w.iter().zip(&stats).map(|(w, s)| w * s.mean).sum::<f64>() / w_sum;

    let a = w
        .iter()
        .zip(&stats)
        .map(|(w, s)| w * (s.mean - weighted_mean).powi(2))
        .sum::<f64>()
        / (k - 1.0);
    let lambda: f64 = w
        .iter()
        .zip(&stats)
        .map(|(w, s)| (1.0 - w / w_sum).powi(2) / (s.n as f64 - 1.0))
        .sum();
    let b = 1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * lambda;
    let f = a / b;
    let df_between = k - 1.0;
    let df_within = (k * k - 1.0) / (3.0 * lambda);
    let p_value = f_sf(f, df_between, df_within)?;

    Ok(AnovaResult {
        method: AnovaMethod::Welch,
        f_statistic: f,
        df_between,
        df_within,
        p_value,
        ordering: ordering(&stats),
        group_stats: stats,
        degenerate: false,
    })
}
