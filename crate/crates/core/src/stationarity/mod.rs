//! Augmented Dickey-Fuller and KPSS tests, and the four-way stationarity
//! classification built on them.
//!
//! Both tests report p-values by linear interpolation in their published
//! critical-value tables. Outside a table the p-value is capped at the
//! nearest tabulated level and `p_is_bound` is set, which is why a
//! significance level must lie in `(0.01, 0.10]`.

mod ols;
pub mod tables;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Decision, HypothesisTestResult};

pub const MIN_SERIES_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AdfRegression {
    #[default]
    ConstantOnly,
    ConstantAndTrend,
}

impl AdfRegression {
    fn n_deterministic(self) -> usize {
        match self {
            AdfRegression::ConstantOnly => 1,
            AdfRegression::ConstantAndTrend => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfConfig {
    pub regression: AdfRegression,
    /// Upper bound of the AIC lag search; defaults to `floor(12 (n/100)^(1/4))`.
    pub max_lag: Option<usize>,
    pub alpha: f64,
}

impl Default for AdfConfig {
    fn default() -> Self {
        AdfConfig {
            regression: AdfRegression::ConstantOnly,
            max_lag: None,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KpssRegression {
    #[default]
    Level,
    Trend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpssConfig {
    pub regression: KpssRegression,
    /// Bartlett window length; defaults to `floor(4 (n/100)^(1/4))`.
    pub lags: Option<usize>,
    pub alpha: f64,
}

impl Default for KpssConfig {
    fn default() -> Self {
        KpssConfig {
            regression: KpssRegression::Level,
            lags: None,
            alpha: 0.05,
        }
    }
}

pub fn default_adf_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn default_kpss_lags(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

fn validate(series: &[f64], alpha: f64) -> Result<()> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::Data(format!(
            "series has {} samples, need at least {MIN_SERIES_LEN}",
            series.len()
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidValue(
            "series contains non-finite values".into(),
        ));
    }
    if !(alpha > 0.01 && alpha <= 0.10) {
        return Err(Error::Parameter(format!(
            "alpha {alpha} outside the tabulated range (0.01, 0.10]"
        )));
    }
    Ok(())
}

fn decide(p_value: f64, alpha: f64) -> Decision {
    if p_value < alpha {
        Decision::RejectNull
    } else {
        Decision::FailToRejectNull
    }
}

/// Design matrix `[deterministic.., y_{t-1}, dy_{t-1}, .., dy_{t-lags}]` for
/// response rows `dy[start..]`.
fn adf_design(
    y: &[f64],
    dy: &[f64],
    start: usize,
    lags: usize,
    regression: AdfRegression,
) -> (DMatrix<f64>, DVector<f64>) {
    let nobs = dy.len() - start;
    let nd = regression.n_deterministic();
    let ncols = nd + 1 + lags;
    let x = DMatrix::from_fn(nobs, ncols, |r, c| {
        let t = start + r;
        if c == 0 {
            1.0
        } else if c < nd {
            (r + 1) as f64
        } else if c == nd {
            y[t]
        } else {
            dy[t - (c - nd)]
        }
    });
    let resp = DVector::from_iterator(nobs, dy[start..].iter().copied());
    (x, resp)
}

/// Augmented Dickey-Fuller test; the null hypothesis is a unit root.
///
/// The lag order minimises AIC over `0..=max_lag`, every candidate fitted on
/// the common sample that the largest lag leaves; the chosen order is then
/// refitted on all available rows. The statistic is the t-ratio of the
/// lagged-level coefficient.
pub fn adf_test(series: &[f64], cfg: AdfConfig) -> Result<HypothesisTestResult> {
    validate(series, cfg.alpha)?;
    let n = series.len();
    let nd = cfg.regression.n_deterministic();
    let cap = (n / 2).saturating_sub(nd + 1);
    let max_lag = match cfg.max_lag {
        Some(l) if l > cap => {
            return Err(Error::Data(format!(
                "series of {n} samples is too short for {l} lags (at most {cap})"
            )))
        }
        Some(l) => l,
        None => default_adf_max_lag(n).min(cap),
    };

    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    let (x, resp) = adf_design(series, &dy, max_lag, max_lag, cfg.regression);
    let nobs = resp.len() as f64;
    let ssr = ols::nested_ssr(&x, &resp, nd + 1)?;
    let mut best = (f64::INFINITY, 0usize);
    for (lag, &s) in ssr.iter().enumerate() {
        if s <= 0.0 {
            return Err(Error::Degenerate("ADF regression fits exactly".into()));
        }
        let k = (nd + 1 + lag) as f64;
        let aic = nobs * (s / nobs).ln() + 2.0 * k;
        if aic < best.0 {
            best = (aic, lag);
        }
    }
    let lags = best.1;

    let (x, resp) = adf_design(series, &dy, lags, lags, cfg.regression);
    let fit = ols::ols(&x, &resp)?;
    let statistic = fit.beta[nd] / fit.std_err[nd];
    if !statistic.is_finite() {
        return Err(Error::Degenerate("ADF statistic is not finite".into()));
    }

    let table = match cfg.regression {
        AdfRegression::ConstantOnly => &tables::ADF_TAU_CONSTANT,
        AdfRegression::ConstantAndTrend => &tables::ADF_TAU_CONSTANT_TREND,
    };
    let crit = tables::adf_critical_values(table, resp.len());
    let (p_value, p_is_bound) = tables::interpolate_p(statistic, &crit, &tables::ADF_LEVELS);

    Ok(HypothesisTestResult {
        statistic,
        p_value,
        p_is_bound,
        decision: decide(p_value, cfg.alpha),
        alpha: cfg.alpha,
        lags: Some(lags),
        nobs: resp.len(),
    })
}

/// Newey-West long-run variance with Bartlett weights `1 - i/(lags+1)`.
pub fn long_run_variance(resid: &[f64], lags: usize) -> f64 {
    let n = resid.len();
    let mut s = resid.iter().map(|e| e * e).sum::<f64>();
    for i in 1..=lags.min(n.saturating_sub(1)) {
        let gamma: f64 = resid[i..].iter().zip(resid).map(|(a, b)| a * b).sum();
        s += 2.0 * (1.0 - i as f64 / (lags as f64 + 1.0)) * gamma;
    }
    s / n as f64
}

fn kpss_residuals(series: &[f64], regression: KpssRegression) -> Result<Vec<f64>> {
    match regression {
        KpssRegression::Level => {
            let mean = series.iter().sum::<f64>() / series.len() as f64;
            Ok(series.iter().map(|x| x - mean).collect())
        }
        KpssRegression::Trend => {
            let n = series.len();
            let x = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { (r + 1) as f64 });
            let y = DVector::from_column_slice(series);
            let fit = ols::ols(&x, &y)?;
            Ok((0..n)
                .map(|t| series[t] - fit.beta[0] - fit.beta[1] * (t + 1) as f64)
                .collect())
        }
    }
}

/// KPSS test; the null hypothesis is level (or trend) stationarity.
pub fn kpss_test(series: &[f64], cfg: KpssConfig) -> Result<HypothesisTestResult> {
    validate(series, cfg.alpha)?;
    let n = series.len();
    let lags = cfg.lags.unwrap_or_else(|| default_kpss_lags(n));
    if lags >= n {
        return Err(Error::Data(format!(
            "{lags} lags needs more than {n} observations"
        )));
    }
    let resid = kpss_residuals(series, cfg.regression)?;

    let mut partial = 0.0;
    let mut eta = 0.0;
    for e in &resid {
        partial += e;
        eta += partial * partial;
    }
    eta /= (n as f64).powi(2);

    let lrv = long_run_variance(&resid, lags);
    let scale = series.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(lrv > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate(
            "long-run variance is zero (constant series?)".into(),
        ));
    }
    let statistic = eta / lrv;

    let crit = match cfg.regression {
        KpssRegression::Level => &tables::KPSS_LEVEL,
        KpssRegression::Trend => &tables::KPSS_TREND,
    };
    let (p_value, p_is_bound) = tables::interpolate_p(statistic, crit, &tables::KPSS_LEVELS);

    Ok(HypothesisTestResult {
        statistic,
        p_value,
        p_is_bound,
        decision: decide(p_value, cfg.alpha),
        alpha: cfg.alpha,
        lags: Some(lags),
        nobs: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stationarity {
    Stationary,
    UnitRoot,
    TrendStationary,
    DifferenceStationary,
}

impl std::fmt::Display for Stationarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Stationarity::Stationary => "stationary",
            Stationarity::UnitRoot => "unit_root",
            Stationarity::TrendStationary => "trend_stationary",
            Stationarity::DifferenceStationary => "difference_stationary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub adf: HypothesisTestResult,
    /// KPSS with level regression.
    pub kpss: HypothesisTestResult,
    /// KPSS with trend regression, consulted only when ADF keeps the unit root
    /// and level KPSS rejects.
    pub kpss_trend: Option<HypothesisTestResult>,
    pub classification: Stationarity,
}

/// Combine ADF and KPSS decisions.
///
/// | ADF        | KPSS (level) | result                                         |
/// |------------|--------------|------------------------------------------------|
/// | rejects    | keeps        | Stationary                                     |
/// | keeps      | rejects      | TrendStationary if trend KPSS keeps, else UnitRoot |
/// | rejects    | rejects      | DifferenceStationary                           |
/// | keeps      | keeps        | UnitRoot                                       |
pub fn classify_stationarity(
    adf: &HypothesisTestResult,
    kpss: &HypothesisTestResult,
    kpss_trend: Option<&HypothesisTestResult>,
) -> Result<StationarityReport> {
    if adf.alpha != kpss.alpha || kpss_trend.is_some_and(|k| k.alpha != adf.alpha) {
        return Err(Error::Parameter(
            "ADF and KPSS results were computed at different alphas".into(),
        ));
    }
    let classification = match (adf.decision.rejects(), kpss.decision.rejects()) {
        (true, false) => Stationarity::Stationary,
        (true, true) => Stationarity::DifferenceStationary,
        (false, false) => Stationarity::UnitRoot,
        (false, true) => {
            let trend = kpss_trend.ok_or_else(|| {
                Error::Parameter("trend-regression KPSS result required for this case".into())
            })?;
            if trend.decision.rejects() {
                Stationarity::UnitRoot
            } else {
                Stationarity::TrendStationary
            }
        }
    };
    Ok(StationarityReport {
        adf: adf.clone(),
        kpss: kpss.clone(),
        kpss_trend: kpss_trend.cloned(),
        classification,
    })
}

/// Run ADF (constant), KPSS (level) and KPSS (trend) at `alpha` and classify.
pub fn stationarity_report(series: &[f64], alpha: f64) -> Result<StationarityReport> {
    let adf = adf_test(
        series,
        AdfConfig {
            alpha,
            ..AdfConfig::default()
        },
    )?;
    let kpss = kpss_test(
        series,
        KpssConfig {
            alpha,
            ..KpssConfig::default()
        },
    )?;
    let kpss_trend = kpss_test(
        series,
        KpssConfig {
            regression: KpssRegression::Trend,
            alpha,
            ..KpssConfig::default()
        },
    )?;
    classify_stationarity(&adf, &kpss, Some(&kpss_trend))
}
