//! Questionnaire inference: equal-variance testing, classic and Welch
//! one-way ANOVA, and the condition / experience-level analyses built on them.
//!
//! Each analysis first runs the Brown-Forsythe variance test; when it rejects,
//! means are compared with Welch's ANOVA, otherwise with the classic F test.

mod anova;
pub mod demo;
mod table;
mod variance;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use anova::{anova_classic, anova_welch, f_sf, AnovaMethod, AnovaResult};
pub use table::{PerceivedFeature, ScoreRow, ScoreTable};
pub use variance::{std_interval, variance_test, VarianceTest};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, ExperienceLevel};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupKey {
    Index(usize),
    Condition(ConditionLabel),
    Experience(ExperienceLevel),
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Index(i) => write!(f, "{i}"),
            GroupKey::Condition(c) => write!(f, "{c}"),
            GroupKey::Experience(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub key: GroupKey,
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_ci: (f64, f64),
}

impl GroupStats {
    pub fn compute(key: GroupKey, values: &[f64], alpha: f64, n_groups: usize) -> Self {
        let variance = unbiased_variance(values);
        GroupStats {
            key,
            n: values.len(),
            mean: mean(values),
            variance,
            std_ci: std_interval(variance, values.len(), alpha, n_groups),
        }
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn unbiased_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

pub(crate) fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// How the mean comparison is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    /// Welch when the variance test rejects, classic otherwise.
    #[default]
    Auto,
    Classic,
    Welch,
}

/// Variance test followed by the selected ANOVA over keyed groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAnalysis {
    pub variance: VarianceTest,
    pub anova: AnovaResult,
}

/// Run the variance-test-then-ANOVA policy on keyed groups.
pub fn analyze_groups(
    groups: &[(GroupKey, Vec<f64>)],
    alpha: f64,
    choice: MethodChoice,
) -> Result<GroupAnalysis> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} outside (0, 1)")));
    }
    let values: Vec<Vec<f64>> = groups.iter().map(|(_, v)| v.clone()).collect();
    let variance = variance_test(&values, alpha).map_err(|e| rename_groups(e, groups))?;
    let method = match choice {
        MethodChoice::Auto if variance.test.decision.rejects() => AnovaMethod::Welch,
        MethodChoice::Auto | MethodChoice::Classic => AnovaMethod::Classic,
        MethodChoice::Welch => AnovaMethod::Welch,
    };
    let mut anova = match method {
        AnovaMethod::Classic => anova::anova_classic_at(&values, alpha),
        AnovaMethod::Welch => anova::anova_welch_at(&values, alpha),
    }
    .map_err(|e| rename_groups(e, groups))?;

    for s in &mut anova.group_stats {
        if let GroupKey::Index(i) = s.key {
            s.key = groups[i].0;
        }
    }
    anova.ordering = anova::ordering(&anova.group_stats);
    Ok(GroupAnalysis { variance, anova })
}

fn rename_groups(err: Error, groups: &[(GroupKey, Vec<f64>)]) -> Error {
    let rename = |msg: String| {
        let mut msg = msg;
        for (i, (key, _)) in groups.iter().enumerate() {
            msg = msg.replace(&format!("group {i} "), &format!("group {key} "));
        }
        msg
    };
    match err {
        Error::Data(m) => Error::Data(rename(m)),
        Error::Degenerate(m) => Error::Degenerate(rename(m)),
        other => other,
    }
}

/// Do the four conditions differ on `feature`?
pub fn feature_condition_analysis(
    table: &ScoreTable,
    feature: PerceivedFeature,
    alpha: f64,
) -> Result<GroupAnalysis> {
    feature_condition_analysis_with(table, feature, alpha, MethodChoice::Auto)
}

pub fn feature_condition_analysis_with(
    table: &ScoreTable,
    feature: PerceivedFeature,
    alpha: f64,
    choice: MethodChoice,
) -> Result<GroupAnalysis> {
    let mut by_condition: BTreeMap<ConditionLabel, Vec<f64>> = BTreeMap::new();
    for r in table.rows().iter().filter(|r| r.feature == feature) {
        by_condition.entry(r.condition).or_default().push(r.score);
    }
    let mut groups = Vec::with_capacity(4);
    for c in ConditionLabel::ALL {
        let scores = by_condition
            .remove(&c)
            .ok_or_else(|| Error::Data(format!("no {feature} scores for condition {c}")))?;
        groups.push((GroupKey::Condition(c), scores));
    }
    analyze_groups(&groups, alpha, choice)
}

/// Do experience levels differ on `feature` within `condition`?
pub fn experience_analysis(
    table: &ScoreTable,
    feature: PerceivedFeature,
    condition: ConditionLabel,
    alpha: f64,
) -> Result<GroupAnalysis> {
    experience_analysis_with(table, feature, condition, alpha, MethodChoice::Auto)
}

pub fn experience_analysis_with(
    table: &ScoreTable,
    feature: PerceivedFeature,
    condition: ConditionLabel,
    alpha: f64,
    choice: MethodChoice,
) -> Result<GroupAnalysis> {
    let mut by_level: BTreeMap<ExperienceLevel, Vec<f64>> = BTreeMap::new();
    for r in table
        .rows()
        .iter()
        .filter(|r| r.feature == feature && r.condition == condition)
    {
        by_level.entry(r.experience).or_default().push(r.score);
    }
    if by_level.len() < 2 {
        return Err(Error::Data(format!(
            "{feature} under condition {condition} has {} populated experience level(s), need 2",
            by_level.len()
        )));
    }
    let groups: Vec<(GroupKey, Vec<f64>)> = by_level
        .into_iter()
        .map(|(lvl, v)| (GroupKey::Experience(lvl), v))
        .collect();
    analyze_groups(&groups, alpha, choice)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: &str, c: ConditionLabel, e: u8, f: PerceivedFeature, s: f64) -> ScoreRow {
        ScoreRow {
            participant: p.into(),
            condition: c,
            experience: ExperienceLevel::new(e).unwrap(),
            feature: f,
            score: s,
        }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn missing_condition_named() {
        use ConditionLabel::*;
        let mut rows = Vec::new();
        for (i, c) in [A, B, C].into_iter().enumerate() {
            for j in 0..3 {
                rows.push(row(
                    &format!("P{j}"),
                    c,
                    0,
                    PerceivedFeature::PS,
                    (i + j) as f64,
                ));
            }
        }
        let t = ScoreTable::new(rows).unwrap();
        let err = feature_condition_analysis(&t, PerceivedFeature::PS, 0.05).unwrap_err();
        assert!(err.to_string().contains("condition D"), "{err}");
    }

    #[test]
    fn single_level_is_data_error() {
        let rows = (0..4)
            .map(|i| {
                row(
                    &format!("P{i}"),
                    ConditionLabel::A,
                    1,
                    PerceivedFeature::AP,
                    i as f64,
                )
            })
            .collect();
        let t = ScoreTable::new(rows).unwrap();
        let err =
            experience_analysis(&t, PerceivedFeature::AP, ConditionLabel::A, 0.05).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn identical_levels_give_p_one() {
        let mut rows = Vec::new();
        for lvl in 0..3u8 {
            for (j, s) in [1.0, 2.0, 3.0].into_iter().enumerate() {
                rows.push(row(
                    &format!("P{lvl}{j}"),
                    ConditionLabel::B,
                    lvl,
                    PerceivedFeature::LK,
                    s,
                ));
            }
        }
        let t = ScoreTable::new(rows).unwrap();
        let r = experience_analysis(&t, PerceivedFeature::LK, ConditionLabel::B, 0.05).unwrap();
        assert_eq!(r.anova.f_statistic, 0.0);
        assert_eq!(r.anova.p_value, 1.0);
    }

    #[test]
    fn singleton_level_error_names_level() {
        let mut rows = Vec::new();
        for j in 0..3 {
            rows.push(row(
                &format!("P{j}"),
                ConditionLabel::A,
                0,
                PerceivedFeature::PS,
                j as f64,
            ));
        }
        rows.push(row("P9", ConditionLabel::A, 3, PerceivedFeature::PS, 1.0));
        let t = ScoreTable::new(rows).unwrap();
        let err =
            experience_analysis(&t, PerceivedFeature::PS, ConditionLabel::A, 0.05).unwrap_err();
        assert!(err.to_string().contains("group 3 "), "{err}");
    }

    #[test]
    fn ties_keep_enumeration_order() {
        use ConditionLabel::*;
        let mut rows = Vec::new();
        for c in [A, B, C, D] {
            for (j, s) in [1.0, 2.0, 3.0].into_iter().enumerate() {
                rows.push(row(&format!("P{j}"), c, 0, PerceivedFeature::AM, s));
            }
        }
        let t = ScoreTable::new(rows).unwrap();
        let r = feature_condition_analysis(&t, PerceivedFeature::AM, 0.05).unwrap();
        assert_eq!(r.anova.ordering_string(), "A>B>C>D");
    }
}
