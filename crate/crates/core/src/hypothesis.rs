use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    RejectNull,
    FailToRejectNull,
}

impl Decision {
    pub fn rejects(self) -> bool {
        self == Decision::RejectNull
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Decision::RejectNull => "reject",
            Decision::FailToRejectNull => "fail_to_reject",
        })
    }
}

/// Outcome of a single hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisTestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// The p-value was capped at the edge of a critical-value table: it is an
    /// upper bound when it equals the smallest tabulated level and a lower
    /// bound when it equals the largest.
    pub p_is_bound: bool,
    pub decision: Decision,
    pub alpha: f64,
    /// Lag order used, for the unit-root family.
    pub lags: Option<usize>,
    pub nobs: usize,
}

impl HypothesisTestResult {
    pub(crate) fn exact(statistic: f64, p_value: f64, alpha: f64, nobs: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        HypothesisTestResult {
            statistic,
            p_value,
            p_is_bound: false,
            decision: if p_value < alpha {
                Decision::RejectNull
            } else {
                Decision::FailToRejectNull
            },
            alpha,
            lags: None,
            nobs,
        }
    }
}
