//! Sliding-window segmentation and min/max rescaling.
//!
//! Window `i` of a series covers samples `[i*j, i*j + p)`. Trailing partial
//! windows are dropped and windows never cross a series boundary, so a series
//! of length `n >= p` yields `floor((n - p) / j) + 1` rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, TimeSeries};

/// Window length `p` and stride `j`, both in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_len: usize,
    pub stride: usize,
}

impl WindowSpec {
    pub fn new(window_len: usize, stride: usize) -> Result<Self> {
        let spec = WindowSpec { window_len, stride };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len < 2 {
            return Err(Error::Parameter(format!(
                "window length must be >= 2, got {}",
                self.window_len
            )));
        }
        if self.stride == 0 {
            return Err(Error::Parameter("stride must be positive".into()));
        }
        Ok(())
    }

    /// Number of whole windows in a series of `n` samples.
    pub fn window_count(&self, n: usize) -> usize {
        if n < self.window_len {
            0
        } else {
            (n - self.window_len) / self.stride + 1
        }
    }

    pub fn effective_length(&self) -> f64 {
        effective_length(self)
    }
}

/// Stride over window length, `j / p`. Smaller means more overlap.
pub fn effective_length(spec: &WindowSpec) -> f64 {
    spec.stride as f64 / spec.window_len as f64
}

/// Stacked windows with one condition label per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSet {
    spec: WindowSpec,
    /// Row-major `len() x window_len`.
    data: Vec<f64>,
    labels: Vec<ConditionLabel>,
    /// Index of the source series for each row.
    sources: Vec<usize>,
    warnings: Vec<String>,
}

impl WindowSet {
    /// Assemble a set from pre-cut rows.
    pub fn from_rows(
        spec: WindowSpec,
        data: Vec<f64>,
        labels: Vec<ConditionLabel>,
        sources: Vec<usize>,
    ) -> Result<Self> {
        spec.validate()?;
        if data.len() != labels.len() * spec.window_len || sources.len() != labels.len() {
            return Err(Error::Shape {
                expected: format!("{} rows of {}", labels.len(), spec.window_len),
                got: format!("{} values, {} sources", data.len(), sources.len()),
            });
        }
        Ok(WindowSet {
            spec,
            data,
            labels,
            sources,
            warnings: Vec::new(),
        })
    }

    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.spec.window_len;
        &self.data[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.spec.window_len)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> &[ConditionLabel] {
        &self.labels
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// Series that were too short to contribute a window.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Cut every series into windows, in series order then window order.
pub fn segment(series: &[TimeSeries], spec: WindowSpec) -> Result<WindowSet> {
    spec.validate()?;
    let p = spec.window_len;
    let total: usize = series.iter().map(|s| spec.window_count(s.len())).sum();

    let mut data = Vec::with_capacity(total * p);
    let mut labels = Vec::with_capacity(total);
    let mut sources = Vec::with_capacity(total);
    let mut warnings = Vec::new();

    for (idx, s) in series.iter().enumerate() {
        let label = s
            .condition()
            .ok_or_else(|| Error::Data(format!("series {idx} has no condition label")))?;
        let count = spec.window_count(s.len());
        if count == 0 {
            warnings.push(format!(
                "series {idx} ({} samples) is shorter than window length {p}; skipped",
                s.len()
            ));
            continue;
        }
        let x = s.samples();
        for i in 0..count {
            let start = i * spec.stride;
            data.extend_from_slice(&x[start..start + p]);
            labels.push(label);
            sources.push(idx);
        }
    }

    if labels.is_empty() {
        return Err(Error::EmptyWindowSet(format!(
            "no series reaches window length {p}"
        )));
    }
    Ok(WindowSet {
        spec,
        data,
        labels,
        sources,
        warnings,
    })
}

/// Target range of [`rescale`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RescaleMode {
    /// `[-1, 1]`, required for the angular encoding.
    NegOneOne,
    /// `[0, 1]`.
    ZeroOne,
}

impl RescaleMode {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            RescaleMode::NegOneOne => (-1.0, 1.0),
            RescaleMode::ZeroOne => (0.0, 1.0),
        }
    }

    pub fn midpoint(self) -> f64 {
        let (lo, hi) = self.bounds();
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledWindow {
    pub values: Vec<f64>,
    pub mode: RescaleMode,
    /// Set when the source window was constant.
    pub degenerate: bool,
}

/// Min/max rescale of a window onto the mode's range.
pub fn rescale(window: &[f64], mode: RescaleMode) -> Result<RescaledWindow> {
    if window.is_empty() {
        return Err(Error::Parameter("cannot rescale an empty window".into()));
    }
    let (min, max) = min_max(window);
    rescale_with_bounds(window, min, max, mode)
}

/// Rescale against externally supplied bounds, e.g. those of the whole
/// source series. Values outside `[min, max]` are clamped.
pub fn rescale_with_bounds(
    window: &[f64],
    min: f64,
    max: f64,
    mode: RescaleMode,
) -> Result<RescaledWindow> {
    if window.is_empty() {
        return Err(Error::Parameter("cannot rescale an empty window".into()));
    }
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(Error::Parameter(format!("invalid bounds [{min}, {max}]")));
    }
    let range = max - min;
    if range == 0.0 {
        return Ok(RescaledWindow {
            values: vec![mode.midpoint(); window.len()],
            mode,
            degenerate: true,
        });
    }
    let (lo, hi) = mode.bounds();
    let values = window
        .iter()
        .map(|&x| {
            let v = match mode {
                RescaleMode::NegOneOne => ((x - max) + (x - min)) / range,
                RescaleMode::ZeroOne => (x - min) / range,
            };
            v.clamp(lo, hi)
        })
        .collect();
    Ok(RescaledWindow {
        values,
        mode,
        degenerate: false,
    })
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}
