//! Gramian Angular Field encoding.
//!
//! A window rescaled to `[-1, 1]` is read as the cosines of polar angles
//! `phi_i = arccos(x_i)`. The difference field holds `sin(phi_a - phi_b)`,
//! the summation field `cos(phi_a + phi_b)`. Both are evaluated through the
//! outer-product identities
//!
//! ```text
//! GADF = s^T x - x^T s        GASF = x^T x - s^T s        s = sqrt(1 - x^2)
//! ```
//!
//! with the square root taken elementwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ConditionLabel;
use crate::windowing::{
    rescale, rescale_with_bounds, RescaleMode, RescaledWindow, WindowSet, WindowSpec,
};

const DOMAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GafKind {
    Gasf,
    Gadf,
}

impl std::str::FromStr for GafKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gasf" => Ok(GafKind::Gasf),
            "gadf" => Ok(GafKind::Gadf),
            other => Err(Error::Parameter(format!("unknown GAF kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for GafKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            GafKind::Gasf => "gasf",
            GafKind::Gadf => "gadf",
        })
    }
}

/// Square GAF matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GafImage {
    pub size: usize,
    pub matrix: Vec<f64>,
    pub kind: GafKind,
    pub source_spec: Option<WindowSpec>,
    pub paa_size: Option<usize>,
}

impl GafImage {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.size + b]
    }
}

/// Polar angles of a `[-1, 1]` window. Values overshooting the range by at
/// most 1e-9 are clamped; anything further out is a domain error.
pub fn polar_angles(w: &RescaledWindow) -> Result<Vec<f64>> {
    check_mode(w)?;
    w.values
        .iter()
        .enumerate()
        .map(|(i, &x)| Ok(clamp_unit(x, i)?.acos()))
        .collect()
}

fn check_mode(w: &RescaledWindow) -> Result<()> {
    if w.mode != RescaleMode::NegOneOne {
        return Err(Error::Parameter(
            "angular encoding needs a window rescaled to [-1, 1]".into(),
        ));
    }
    Ok(())
}

fn clamp_unit(x: f64, i: usize) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + DOMAIN_TOLERANCE {
        return Err(Error::Domain(format!(
            "value {x} at {i} is outside [-1, 1]"
        )));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Cosine and sine components of each angle: `(x, sqrt(1 - x^2))`.
fn components(w: &RescaledWindow) -> Result<(Vec<f64>, Vec<f64>)> {
    check_mode(w)?;
    let cos = w
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| clamp_unit(x, i))
        .collect::<Result<Vec<_>>>()?;
    let sin = cos.iter().map(|&x| (1.0 - x * x).max(0.0).sqrt()).collect();
    Ok((cos, sin))
}

/// Gramian Angular Difference Field, entry `(a, b) = sin(phi_a - phi_b)`.
pub fn gadf(w: &RescaledWindow) -> Result<GafImage> {
    let (x, s) = components(w)?;
    let n = x.len();
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        let row = &mut m[a * n..(a + 1) * n];
        for b in 0..n {
            row[b] = (s[a] * x[b] - x[a] * s[b]).clamp(-1.0, 1.0);
        }
    }
    Ok(GafImage {
        size: n,
        matrix: m,
        kind: GafKind::Gadf,
        source_spec: None,
        paa_size: None,
    })
}

/// Gramian Angular Summation Field, entry `(a, b) = cos(phi_a + phi_b)`.
pub fn gasf(w: &RescaledWindow) -> Result<GafImage> {
    let (x, s) = components(w)?;
    let n = x.len();
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        let row = &mut m[a * n..(a + 1) * n];
        for b in 0..n {
            row[b] = (x[a] * x[b] - s[a] * s[b]).clamp(-1.0, 1.0);
        }
    }
    Ok(GafImage {
        size: n,
        matrix: m,
        kind: GafKind::Gasf,
        source_spec: None,
        paa_size: None,
    })
}

/// Piecewise aggregate approximation to `target_size` segments.
///
/// Segment boundaries may fall inside a sample; such samples contribute to
/// both neighbours in proportion to their overlap. Works in integer units
/// scaled by `target_size` so the overlaps are exact.
pub fn paa(values: &[f64], target_size: usize) -> Result<Vec<f64>> {
    let p = values.len();
    if target_size == 0 || target_size > p {
        return Err(Error::Parameter(format!(
            "PAA size {target_size} must be in 1..={p}"
        )));
    }
    if target_size == p {
        return Ok(values.to_vec());
    }
    let s = target_size;
    let mut out = Vec::with_capacity(s);
    for k in 0..s {
        // Segment k spans [k*p, (k+1)*p) in scaled units; sample i spans [i*s, (i+1)*s).
        let seg_lo = k * p;
        let seg_hi = (k + 1) * p;
        let first = seg_lo / s;
        let last = (seg_hi - 1) / s;
        let mut acc = 0.0;
        for (i, &v) in values.iter().enumerate().take(last + 1).skip(first) {
            let lo = seg_lo.max(i * s);
            let hi = seg_hi.min((i + 1) * s);
            acc += (hi - lo) as f64 * v;
        }
        out.push(acc / p as f64);
    }
    Ok(out)
}

/// Whether min/max bounds come from each window or from its whole series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleScope {
    #[default]
    PerWindow,
    PerSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeOptions {
    pub kind: GafKind,
    /// Downsample each window to this many points before encoding.
    pub paa_size: Option<usize>,
    pub scope: RescaleScope,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            kind: GafKind::Gadf,
            paa_size: Some(64),
            scope: RescaleScope::PerWindow,
        }
    }
}

/// Encode one raw window: optional PAA, rescale to `[-1, 1]`, then GAF.
pub fn encode_window(raw: &[f64], opts: &EncodeOptions) -> Result<GafImage> {
    encode_with(raw, opts, None)
}

fn encode_with(raw: &[f64], opts: &EncodeOptions, bounds: Option<(f64, f64)>) -> Result<GafImage> {
    let reduced;
    let mut paa_size = None;
    let x = match opts.paa_size {
        Some(s) if s < raw.len() => {
            reduced = paa(raw, s)?;
            paa_size = Some(s);
            &reduced[..]
        }
        Some(s) if s > raw.len() => {
            return Err(Error::Parameter(format!(
                "PAA size {s} exceeds window length {}",
                raw.len()
            )))
        }
        _ => raw,
    };
    let w = match bounds {
        Some((lo, hi)) => rescale_with_bounds(x, lo, hi, RescaleMode::NegOneOne)?,
        None => rescale(x, RescaleMode::NegOneOne)?,
    };
    let mut img = match opts.kind {
        GafKind::Gadf => gadf(&w)?,
        GafKind::Gasf => gasf(&w)?,
    };
    img.paa_size = paa_size;
    Ok(img)
}

/// Encoded images of a whole window set, stacked row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GafSet {
    pub size: usize,
    pub kind: GafKind,
    pub spec: WindowSpec,
    /// `len() x size x size`.
    pub data: Vec<f64>,
    pub labels: Vec<ConditionLabel>,
    pub sources: Vec<usize>,
}

impl GafSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[f64] {
        let n = self.size * self.size;
        &self.data[i * n..(i + 1) * n]
    }
}

/// Encode every window of `set`, preserving row order and labels.
pub fn encode_set(set: &WindowSet, opts: &EncodeOptions) -> Result<GafSet> {
    let spec = set.spec();
    let size = match opts.paa_size {
        Some(s) => s.min(spec.window_len),
        None => spec.window_len,
    };

    // Per-series bounds are taken over the union of that series' windows.
    let series_bounds = match opts.scope {
        RescaleScope::PerWindow => None,
        RescaleScope::PerSeries => {
            let mut bounds = std::collections::BTreeMap::<usize, (f64, f64)>::new();
            for (row, &src) in set.rows().zip(set.sources()) {
                let x = match opts.paa_size {
                    Some(s) if s < row.len() => paa(row, s)?,
                    _ => row.to_vec(),
                };
                let (lo, hi) = crate::windowing::min_max(&x);
                let e = bounds.entry(src).or_insert((lo, hi));
                e.0 = e.0.min(lo);
                e.1 = e.1.max(hi);
            }
            Some(bounds)
        }
    };

    let mut data = Vec::with_capacity(set.len() * size * size);
    for (row, src) in set.rows().zip(set.sources()) {
        let bounds = series_bounds.as_ref().map(|b| b[src]);
        let img = encode_with(row, opts, bounds)?;
        data.extend_from_slice(&img.matrix);
    }
    Ok(GafSet {
        size,
        kind: opts.kind,
        spec,
        data,
        labels: set.labels().to_vec(),
        sources: set.sources().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn window(values: Vec<f64>) -> RescaledWindow {
        RescaledWindow {
            values,
            mode: RescaleMode::NegOneOne,
            degenerate: false,
        }
    }

    #[test]
    fn angles_at_endpoints() {
        let phi = polar_angles(&window(vec![1.0, 0.0, -1.0])).unwrap();
        assert_eq!(phi[0], 0.0);
        assert!((phi[1] - PI / 2.0).abs() < 1e-15);
        assert!((phi[2] - PI).abs() < 1e-15);
        let phi = polar_angles(&window(vec![0.5])).unwrap();
        assert!((phi[0] - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn angles_clamp_within_tolerance() {
        let phi = polar_angles(&window(vec![1.0 + 1e-12])).unwrap();
        assert_eq!(phi, vec![0.0]);
        assert!(matches!(
            polar_angles(&window(vec![1.0 + 1e-6])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_one_mode_rejected() {
        let w = RescaledWindow {
            values: vec![0.5],
            mode: RescaleMode::ZeroOne,
            degenerate: false,
        };
        assert!(gadf(&w).is_err());
    }

    #[test]
    fn constant_window_gives_zero_gadf() {
        let w = rescale(&[3.0; 5], RescaleMode::NegOneOne).unwrap();
        let img = gadf(&w).unwrap();
        assert_eq!(img.size, 5);
        assert!(img.matrix.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn endpoints_gadf_vanishes() {
        let img = gadf(&window(vec![1.0, -1.0])).unwrap();
        assert!(img.matrix.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn gasf_single_points() {
        assert_eq!(gasf(&window(vec![1.0])).unwrap().matrix, vec![1.0]);
        assert_eq!(gasf(&window(vec![-1.0])).unwrap().matrix, vec![1.0]);
    }

    #[test]
    fn paa_examples() {
        assert_eq!(paa(&[1.0, 1.0, 3.0, 3.0], 2).unwrap(), vec![1.0, 3.0]);
        let v = [0.3, -1.0, 2.5];
        assert_eq!(paa(&v, 3).unwrap(), v.to_vec());
        assert!(paa(&v, 4).is_err());
        assert!(paa(&v, 0).is_err());
    }

    #[test]
    fn paa_fractional_segments() {
        // Hand computation: segment width 1.5 samples.
        let out = paa(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 4).unwrap();
        let expected = [
            (0.0 + 0.5 * 1.0) / 1.5,
            (0.5 * 1.0 + 2.0) / 1.5,
            (3.0 + 0.5 * 4.0) / 1.5,
            (0.5 * 4.0 + 5.0) / 1.5,
        ];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_window_applies_paa() {
        let raw: Vec<f64> = (0..128).map(|i| (i as f64 * 0.1).sin()).collect();
        let img = encode_window(&raw, &EncodeOptions::default()).unwrap();
        assert_eq!(img.size, 64);
        assert_eq!(img.paa_size, Some(64));
        assert_eq!(img.kind, GafKind::Gadf);
    }
}
