//! Loading wrist-band BVP recordings, session manifests, and seeded
//! synthetic sessions.
//!
//! BVP files use the two-header-line layout of E4 exports:
//!
//! ```text
//! 1600000000.0      <- UTC start time, seconds
//! 64.0              <- sample rate, Hz
//! 0.12              <- one sample per line
//! ...
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four robot modality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConditionLabel {
    A,
    B,
    C,
    D,
}

impl ConditionLabel {
    pub const ALL: [ConditionLabel; 4] = [
        ConditionLabel::A,
        ConditionLabel::B,
        ConditionLabel::C,
        ConditionLabel::D,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionLabel::A => "A",
            ConditionLabel::B => "B",
            ConditionLabel::C => "C",
            ConditionLabel::D => "D",
        };
        f.pad(s)
    }
}

impl FromStr for ConditionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(ConditionLabel::A),
            "B" => Ok(ConditionLabel::B),
            "C" => Ok(ConditionLabel::C),
            "D" => Ok(ConditionLabel::D),
            other => Err(Error::InvalidValue(format!("unknown condition '{other}'"))),
        }
    }
}

/// Self-reported familiarity with robots, 0 (none) to 3 (intermediate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ExperienceLevel(u8);

impl ExperienceLevel {
    pub const ALL: [ExperienceLevel; 4] = [
        ExperienceLevel(0),
        ExperienceLevel(1),
        ExperienceLevel(2),
        ExperienceLevel(3),
    ];

    pub fn new(value: u8) -> Result<Self> {
        if value <= 3 {
            Ok(ExperienceLevel(value))
        } else {
            Err(Error::InvalidValue(format!(
                "experience level {value} outside 0..=3"
            )))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for ExperienceLevel {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        ExperienceLevel::new(value)
    }
}

impl From<ExperienceLevel> for u8 {
    fn from(level: ExperienceLevel) -> u8 {
        level.0
    }
}

impl fmt::Display for ExperienceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ExperienceLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: i64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidValue(format!("experience '{s}' is not an integer")))?;
        if !(0..=3).contains(&v) {
            return Err(Error::InvalidValue(format!(
                "experience level {v} outside 0..=3"
            )));
        }
        ExperienceLevel::new(v as u8)
    }
}

/// A uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    start_time: f64,
    condition: Option<ConditionLabel>,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, start_time: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidValue("time series has no samples".into()));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidValue(format!("sample {i} is not finite")));
        }
        Ok(TimeSeries {
            samples,
            sample_rate_hz,
            start_time,
            condition: None,
        })
    }

    pub fn with_condition(mut self, condition: ConditionLabel) -> Self {
        self.condition = Some(condition);
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn condition(&self) -> Option<ConditionLabel> {
        self.condition
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Parse an E4-style BVP export. LF and CRLF line endings are accepted.
pub fn parse_e4_bvp(raw_text: &str) -> Result<TimeSeries> {
    let mut lines = raw_text.lines().enumerate();

    let mut header = |what: &str| -> Result<f64> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::Truncated(format!("missing {what} header line")))?;
        parse_field(line, i + 1, what)
    };
    let start_time = header("start timestamp")?;
    let sample_rate_hz = header("sample rate")?;

    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        samples.push(parse_field(line, i + 1, "sample")?);
    }
    if samples.is_empty() {
        return Err(Error::InvalidValue(
            "BVP file contains headers but no samples".into(),
        ));
    }
    TimeSeries::new(samples, sample_rate_hz, start_time)
}

fn parse_field(line: &str, line_no: usize, what: &str) -> Result<f64> {
    // E4 exports sometimes carry a trailing comma-separated column.
    let field = line.split(',').next().unwrap_or("").trim();
    field.parse::<f64>().map_err(|_| Error::Format {
        line: line_no,
        message: format!("{what} '{field}' is not a number"),
    })
}

/// Render a series in the E4 layout; samples carry 9 significant digits.
pub fn write_e4_bvp(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(series.len() * 12 + 32);
    out.push_str(&format!("{:?}\n", series.start_time));
    out.push_str(&format!("{:?}\n", series.sample_rate_hz));
    for &x in &series.samples {
        out.push_str(&format_sig(x, 9));
        out.push('\n');
    }
    out
}

/// Shortest decimal text for `x` rounded to `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x);
    format!("{rounded:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub participant: String,
    pub condition: ConditionLabel,
    pub experience: ExperienceLevel,
}

/// The list of recordings making up a study.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: String,
    participant: String,
    condition: String,
    experience: String,
}

/// Parse a manifest CSV with header `path,participant,condition,experience`.
pub fn load_manifest(raw_text: &str) -> Result<SessionManifest> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(raw_text.as_bytes());
    let headers = reader.headers()?.clone();
    let expected = ["path", "participant", "condition", "experience"];
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Format {
            line: 1,
            message: format!(
                "manifest header must be '{}', got '{}'",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        let wrap = |e: Error| Error::Format {
            line,
            message: e.to_string(),
        };
        if row.participant.is_empty() {
            return Err(wrap(Error::InvalidValue("empty participant id".into())));
        }
        let condition: ConditionLabel = row.condition.parse().map_err(wrap)?;
        let experience: ExperienceLevel = row.experience.parse().map_err(wrap)?;
        if !seen.insert((row.participant.clone(), condition)) {
            return Err(wrap(Error::Data(format!(
                "duplicate entry for participant {} condition {condition}",
                row.participant
            ))));
        }
        entries.push(ManifestEntry {
            path: PathBuf::from(row.path),
            participant: row.participant,
            condition,
            experience,
        });
    }
    Ok(SessionManifest { entries })
}

/// Read every recording named in `manifest`, resolving relative paths against
/// `base_dir`. Each returned series carries its entry's condition.
pub fn load_sessions(
    manifest: &SessionManifest,
    base_dir: &Path,
) -> Result<Vec<(ManifestEntry, TimeSeries)>> {
    manifest
        .entries
        .iter()
        .map(|entry| {
            let path = if entry.path.is_absolute() {
                entry.path.clone()
            } else {
                base_dir.join(&entry.path)
            };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::from(e).in_file(&path))?;
            let series = parse_e4_bvp(&text).map_err(|e| e.in_file(&path))?;
            Ok((entry.clone(), series.with_condition(entry.condition)))
        })
        .collect()
}

/// Waveform parameters for one condition of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionParams {
    pub cardiac_hz: f64,
    pub amplitude: f64,
    pub harmonic_ratio: f64,
    pub resp_depth: f64,
    pub noise_std: f64,
    /// Linear baseline wander, amplitude units per second.
    #[serde(default)]
    pub baseline_drift: f64,
}

impl ConditionParams {
    pub fn new(cardiac_hz: f64) -> Self {
        ConditionParams {
            cardiac_hz,
            amplitude: 1.0,
            harmonic_ratio: 0.3,
            resp_depth: 0.2,
            noise_std: 0.15,
            baseline_drift: 0.08,
        }
    }
}

/// Configuration of the seeded synthetic BVP generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    /// Parameters indexed by condition A..D.
    pub conditions: [ConditionParams; 4],
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            duration_s: 120.0,
            sample_rate_hz: 64.0,
            conditions: [
                ConditionParams::new(1.0),
                ConditionParams::new(1.2),
                ConditionParams::new(1.4),
                ConditionParams::new(1.6),
            ],
        }
    }
}

pub const RESPIRATORY_HZ: f64 = 0.25;

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Parameter("duration_s must be positive".into()));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::Parameter("sample_rate_hz must be positive".into()));
        }
        if self.sample_count() == 0 {
            return Err(Error::Parameter(
                "duration_s * sample_rate_hz is below one sample".into(),
            ));
        }
        for (cond, p) in ConditionLabel::ALL.iter().zip(&self.conditions) {
            if !(0.5..=3.0).contains(&p.cardiac_hz) {
                return Err(Error::Parameter(format!(
                    "condition {cond}: cardiac frequency {} Hz outside [0.5, 3.0]",
                    p.cardiac_hz
                )));
            }
            if !(p.noise_std >= 0.0 && p.noise_std.is_finite()) {
                return Err(Error::Parameter(format!(
                    "condition {cond}: noise std must be >= 0"
                )));
            }
            let finite = [
                p.amplitude,
                p.harmonic_ratio,
                p.resp_depth,
                p.baseline_drift,
            ]
            .iter()
            .all(|v| v.is_finite());
            if !finite {
                return Err(Error::Parameter(format!(
                    "condition {cond}: non-finite waveform parameter"
                )));
            }
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).floor() as usize
    }

    pub fn params(&self, condition: ConditionLabel) -> &ConditionParams {
        &self.conditions[condition.index()]
    }
}

/// Generate one labeled synthetic session.
///
/// Cardiac sinusoid plus a second harmonic carrying respiratory amplitude
/// modulation, Gaussian measurement noise and a linear baseline drift. Each
/// condition draws from its own ChaCha stream, so sessions are reproducible
/// independently of generation order.
pub fn generate_synthetic_session(
    cfg: &SyntheticConfig,
    condition: ConditionLabel,
) -> Result<TimeSeries> {
    cfg.validate()?;
    let p = cfg.params(condition);
    let n = cfg.sample_count();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(condition.index() as u64);
    let noise = Normal::new(0.0, p.noise_std).map_err(|e| Error::Parameter(e.to_string()))?;

    let two_pi = 2.0 * std::f64::consts::PI;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / cfg.sample_rate_hz;
            let cardiac = p.amplitude * (two_pi * p.cardiac_hz * t).sin();
            let harmonic = p.amplitude * p.harmonic_ratio * (2.0 * two_pi * p.cardiac_hz * t).sin();
            let resp = 1.0 + p.resp_depth * (two_pi * RESPIRATORY_HZ * t).sin();
            let eps = if p.noise_std > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            cardiac + harmonic * resp + eps + p.baseline_drift * t
        })
        .collect();

    Ok(TimeSeries::new(samples, cfg.sample_rate_hz, 0.0)?.with_condition(condition))
}

/// One session per condition, in A..D order.
pub fn generate_synthetic_corpus(cfg: &SyntheticConfig) -> Result<Vec<TimeSeries>> {
    ConditionLabel::ALL
        .iter()
        .map(|&c| generate_synthetic_session(cfg, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure_sine_cfg() -> SyntheticConfig {
        let mut p = ConditionParams::new(1.0);
        p.noise_std = 0.0;
        p.resp_depth = 0.0;
        p.harmonic_ratio = 0.0;
        p.baseline_drift = 0.0;
        SyntheticConfig {
            seed: 1,
            duration_s: 1.0,
            sample_rate_hz: 4.0,
            conditions: [p; 4],
        }
    }

    #[test]
    fn parses_minimal_file() {
        let ts = parse_e4_bvp("1600000000.0\n64.0\n0.0\n1.0\n").unwrap();
        assert_eq!(ts.start_time(), 1_600_000_000.0);
        assert_eq!(ts.sample_rate_hz(), 64.0);
        assert_eq!(ts.samples(), &[0.0, 1.0]);
    }

    #[test]
    fn parses_crlf() {
        let ts = parse_e4_bvp("1600000000.0\r\n64.0\r\n0.5\r\n-1.25\r\n").unwrap();
        assert_eq!(ts.samples(), &[0.5, -1.25]);
    }

    #[test]
    fn headers_only_is_empty_error() {
        let err = parse_e4_bvp("1600000000.0\n64.0\n").unwrap_err();
        assert!(matches!(err, Error::InvalidValue(_)), "{err}");
    }

    #[test]
    fn bad_header_names_line_one() {
        match parse_e4_bvp("abc\n64.0\n1.0\n").unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, 1),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_sample_names_line() {
        match parse_e4_bvp("0\n64\n1.0\nfoo\n").unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn single_line_is_truncated() {
        assert!(matches!(parse_e4_bvp("0\n"), Err(Error::Truncated(_))));
        assert!(matches!(parse_e4_bvp(""), Err(Error::Truncated(_))));
    }

    #[test]
    fn non_positive_rate_rejected() {
        assert!(parse_e4_bvp("0\n0\n1.0\n").is_err());
    }

    #[test]
    fn manifest_row() {
        let m = load_manifest("path,participant,condition,experience\ns1.csv,P01,a,2\n").unwrap();
        assert_eq!(m.entries.len(), 1);
        let e = &m.entries[0];
        assert_eq!(e.participant, "P01");
        assert_eq!(e.condition, ConditionLabel::A);
        assert_eq!(e.experience.value(), 2);
    }

    #[test]
    fn manifest_unknown_condition() {
        let err =
            load_manifest("path,participant,condition,experience\ns1.csv,P01,E,2\n").unwrap_err();
        assert!(err.to_string().contains("unknown condition"), "{err}");
    }

    #[test]
    fn manifest_bad_experience() {
        let err =
            load_manifest("path,participant,condition,experience\ns1.csv,P01,A,4\n").unwrap_err();
        assert!(err.to_string().contains("outside 0..=3"), "{err}");
    }

    #[test]
    fn manifest_duplicate_pair() {
        let text = "path,participant,condition,experience\ns1.csv,P01,A,2\ns2.csv,P01,A,2\n";
        let err = load_manifest(text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn pure_sine_at_quarter_period() {
        let ts = generate_synthetic_session(&pure_sine_cfg(), ConditionLabel::A).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0];
        assert_eq!(ts.len(), 4);
        for (x, e) in ts.samples().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12, "{x} vs {e}");
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let cfg = SyntheticConfig::default();
        let a = generate_synthetic_session(&cfg, ConditionLabel::C).unwrap();
        let b = generate_synthetic_session(&cfg, ConditionLabel::C).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_eq!(a.len(), 7680);
    }

    #[test]
    fn generator_rejects_bad_frequency() {
        let mut cfg = SyntheticConfig::default();
        cfg.conditions[2].cardiac_hz = 3.5;
        assert!(generate_synthetic_session(&cfg, ConditionLabel::A).is_err());
    }

    #[test]
    fn format_sig_rounds() {
        assert_eq!(format_sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_sig(-2.0, 9), "-2.0");
    }
}
