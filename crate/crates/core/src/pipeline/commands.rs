use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::archive::{gaf_archive, read_archive, window_archive, Archive};
use super::config::RunConfig;
use super::svg::{line_chart, Series};
use crate::error::{Error, Result};
use crate::gaf::encode_set;
use crate::ingest::{
    format_sig, generate_synthetic_corpus, load_manifest, load_sessions, ConditionLabel, TimeSeries,
};
use crate::nn::{train, Dataset, ModelConfig, TrainReport, Variant};
use crate::stationarity::stationarity_report;
use crate::stats::{
    demo::{demo_score_table, DEMO_SEED},
    experience_analysis_with, feature_condition_analysis_with, GroupAnalysis, PerceivedFeature,
    ScoreTable,
};
use crate::windowing::{effective_length, segment, WindowSet, WindowSpec};

/// Where and how a command runs.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    /// Suppress timestamps in SVG output.
    pub deterministic: bool,
}

impl Context {
    pub fn new(config: RunConfig, out_dir: impl Into<PathBuf>, deterministic: bool) -> Self {
        Context {
            config,
            out_dir: out_dir.into(),
            deterministic,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8], out: &mut Outcome) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| Error::from(e).in_file(&self.out_dir))?;
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| Error::from(e).in_file(&path))?;
        out.files.push(path);
        Ok(())
    }

    fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
        out: &mut Outcome,
    ) -> Result<()> {
        let mut buf = format!("# config_hash={}\n", self.config.hash()).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        self.write(name, &buf, out)
    }

    fn stamp(&self) -> Option<String> {
        if self.deterministic {
            return None;
        }
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Some(format!("generated at unix time {secs}"))
    }
}

/// A failure confined to one row or cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub command: String,
    pub item: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub messages: Vec<String>,
    pub row_errors: Vec<RowError>,
}

impl Outcome {
    fn merge(&mut self, other: Outcome) {
        self.files.extend(other.files);
        self.messages.extend(other.messages);
        self.row_errors.extend(other.row_errors);
    }

    fn row_error(&mut self, command: &str, item: impl Into<String>, err: &Error) {
        self.row_errors.push(RowError {
            command: command.into(),
            item: item.into(),
            message: err.to_string(),
        });
    }

    /// Write `errors.json` listing every row error, if there are any.
    pub fn write_error_manifest(&mut self, dir: &Path) -> Result<Option<PathBuf>> {
        if self.row_errors.is_empty() {
            return Ok(None);
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
        let path = dir.join("errors.json");
        let json = serde_json::to_string_pretty(&self.row_errors).expect("serializable");
        std::fs::write(&path, json + "\n").map_err(|e| Error::from(e).in_file(&path))?;
        Ok(Some(path))
    }
}

fn num(x: f64) -> String {
    format_sig(x, 10)
}

fn spec_name(spec: WindowSpec) -> String {
    format!("p{}_j{}", spec.window_len, spec.stride)
}

/// Labeled series plus the participant index of each.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub series: Vec<TimeSeries>,
    pub participant_of: Vec<usize>,
    pub participants: Vec<String>,
}

pub fn load_corpus(cfg: &RunConfig) -> Result<Corpus> {
    match &cfg.manifest {
        None => {
            let series = generate_synthetic_corpus(&cfg.synthetic_config())?;
            Ok(Corpus {
                participant_of: vec![0; series.len()],
                series,
                participants: vec!["synthetic".into()],
            })
        }
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
            let manifest = load_manifest(&text).map_err(|e| e.in_file(path))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let mut participants: Vec<String> = Vec::new();
            let mut participant_of = Vec::new();
            let mut series = Vec::new();
            for (entry, s) in load_sessions(&manifest, base)? {
                let idx = match participants.iter().position(|p| *p == entry.participant) {
                    Some(i) => i,
                    None => {
                        participants.push(entry.participant.clone());
                        participants.len() - 1
                    }
                };
                participant_of.push(idx);
                series.push(s);
            }
            Ok(Corpus {
                series,
                participant_of,
                participants,
            })
        }
    }
}

fn specs(list: &[[usize; 2]]) -> Result<Vec<WindowSpec>> {
    list.iter().map(|[p, j]| WindowSpec::new(*p, *j)).collect()
}

/// Cut the corpus with every configured spec and write one window archive
/// per spec plus `segment_summary.csv`.
pub fn cmd_segment(ctx: &Context) -> Result<Outcome> {
    let corpus = load_corpus(&ctx.config)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for spec in specs(&ctx.config.windows)? {
        match segment(&corpus.series, spec) {
            Ok(ws) => {
                ctx.write(
                    &format!("windows_{}.bin", spec_name(spec)),
                    &window_archive(&ws)?,
                    &mut out,
                )?;
                out.messages.push(format!(
                    "p={} j={}: {} windows, effective length {}",
                    spec.window_len,
                    spec.stride,
                    ws.len(),
                    effective_length(&spec)
                ));
                out.messages.extend(ws.warnings().iter().cloned());
                rows.push(vec![
                    spec.window_len.to_string(),
                    spec.stride.to_string(),
                    num(effective_length(&spec)),
                    ws.len().to_string(),
                    ws.warnings().len().to_string(),
                ]);
            }
            Err(e) => out.row_error("segment", spec_name(spec), &e),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyWindowSet(format!(
            "no spec produced any windows ({} series)",
            corpus.series.len()
        )));
    }
    ctx.write_csv(
        "segment_summary.csv",
        &["p", "j", "effective_length", "windows", "warnings"],
        &rows,
        &mut out,
    )?;
    Ok(out)
}

/// Segment and GAF-encode with every configured spec.
pub fn cmd_encode(ctx: &Context) -> Result<Outcome> {
    let corpus = load_corpus(&ctx.config)?;
    let opts = ctx.config.encode;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for spec in specs(&ctx.config.windows)? {
        match segment(&corpus.series, spec).and_then(|ws| encode_set(&ws, &opts)) {
            Ok(g) => {
                ctx.write(
                    &format!("gaf_{}.bin", spec_name(spec)),
                    &gaf_archive(&g)?,
                    &mut out,
                )?;
                out.messages.push(format!(
                    "p={} j={}: {} {} images of {}x{}",
                    spec.window_len,
                    spec.stride,
                    g.len(),
                    g.kind,
                    g.size,
                    g.size
                ));
                rows.push(vec![
                    spec.window_len.to_string(),
                    spec.stride.to_string(),
                    g.kind.to_string(),
                    g.size.to_string(),
                    g.len().to_string(),
                ]);
            }
            Err(e) => out.row_error("encode", spec_name(spec), &e),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyWindowSet("no spec produced any images".into()));
    }
    ctx.write_csv(
        "encode_summary.csv",
        &["p", "j", "kind", "size", "images"],
        &rows,
        &mut out,
    )?;
    Ok(out)
}

/// ADF and KPSS per condition on the concatenated sessions of that condition.
pub fn cmd_stationarity(ctx: &Context) -> Result<Outcome> {
    let corpus = load_corpus(&ctx.config)?;
    let alpha = ctx.config.stationarity.alpha;
    let mut by_condition: BTreeMap<ConditionLabel, Vec<f64>> = BTreeMap::new();
    for s in &corpus.series {
        if let Some(c) = s.condition() {
            by_condition
                .entry(c)
                .or_default()
                .extend_from_slice(s.samples());
        }
    }
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut table: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (c, samples) in &by_condition {
        match stationarity_report(samples, alpha) {
            Ok(r) => {
                let trend = r.kpss_trend.as_ref().expect("report includes trend test");
                rows.push(vec![
                    c.to_string(),
                    samples.len().to_string(),
                    num(r.adf.statistic),
                    num(r.adf.p_value),
                    r.adf.p_is_bound.to_string(),
                    r.adf.lags.unwrap_or(0).to_string(),
                    num(r.kpss.statistic),
                    num(r.kpss.p_value),
                    r.kpss.p_is_bound.to_string(),
                    num(trend.statistic),
                    num(trend.p_value),
                    r.classification.to_string(),
                    String::new(),
                ]);
                table.entry("ADF").or_default().push(num(r.adf.p_value));
                table.entry("KPSS").or_default().push(num(r.kpss.p_value));
                out.messages.push(format!(
                    "{c}: ADF p={} KPSS p={} -> {}",
                    num(r.adf.p_value),
                    num(r.kpss.p_value),
                    r.classification
                ));
            }
            Err(e) => {
                out.row_error("stationarity", c.to_string(), &e);
                let mut row = vec![c.to_string(), samples.len().to_string()];
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.extend(["degenerate".to_string(), e.to_string()]);
                rows.push(row);
                table.entry("ADF").or_default().push(String::new());
                table.entry("KPSS").or_default().push(String::new());
            }
        }
    }
    ctx.write_csv(
        "stationarity.csv",
        &[
            "condition",
            "n",
            "adf_statistic",
            "adf_p",
            "adf_p_bound",
            "adf_lags",
            "kpss_statistic",
            "kpss_p",
            "kpss_p_bound",
            "kpss_trend_statistic",
            "kpss_trend_p",
            "classification",
            "error",
        ],
        &rows,
        &mut out,
    )?;
    let mut header = vec!["test".to_string()];
    header.extend(by_condition.keys().map(|c| c.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let grid: Vec<Vec<String>> = ["ADF", "KPSS"]
        .iter()
        .map(|t| {
            let mut r = vec![t.to_string()];
            r.extend(table.get(t).cloned().unwrap_or_default());
            r
        })
        .collect();
    ctx.write_csv("stationarity_table.csv", &header, &grid, &mut out)?;
    Ok(out)
}

fn load_scores(ctx: &Context, out: &mut Outcome) -> Result<ScoreTable> {
    match &ctx.config.anova.scores {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
            ScoreTable::from_csv(&text).map_err(|e| e.in_file(path))
        }
        None => {
            let table = demo_score_table(DEMO_SEED);
            let text = format!("# config_hash={}\n{}", ctx.config.hash(), table.to_csv());
            ctx.write("demo_scores.csv", text.as_bytes(), out)?;
            Ok(table)
        }
    }
}

fn analysis_cells(a: &GroupAnalysis, alpha: f64) -> Vec<String> {
    vec![
        num(a.variance.test.statistic),
        num(a.variance.test.p_value),
        a.anova.method.to_string(),
        num(a.anova.f_statistic),
        num(a.anova.df_between),
        num(a.anova.df_within),
        num(a.anova.p_value),
        (a.anova.p_value < alpha).to_string(),
        a.anova.ordering_string(),
        String::new(),
    ]
}

const ANALYSIS_COLUMNS: [&str; 10] = [
    "variance_statistic",
    "variance_p",
    "method",
    "f_statistic",
    "df_between",
    "df_within",
    "anova_p",
    "significant",
    "ordering",
    "error",
];

/// Feature-by-condition and experience-level analyses of a score table.
pub fn cmd_anova(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome::default();
    let table = load_scores(ctx, &mut out)?;
    let settings = &ctx.config.anova;
    let alpha = settings.alpha;

    let mut rows = Vec::new();
    for f in PerceivedFeature::ALL {
        let mut row = vec![f.to_string()];
        match feature_condition_analysis_with(&table, f, alpha, settings.method) {
            Ok(a) => {
                out.messages.push(format!(
                    "{f}: {} p={} ordering {}",
                    a.anova.method,
                    num(a.anova.p_value),
                    a.anova.ordering_string()
                ));
                row.extend(analysis_cells(&a, alpha));
            }
            Err(e) => {
                out.row_error("anova", f.to_string(), &e);
                row.extend(std::iter::repeat_n(
                    String::new(),
                    ANALYSIS_COLUMNS.len() - 1,
                ));
                row.push(e.to_string());
            }
        }
        rows.push(row);
    }
    let mut header = vec!["feature"];
    header.extend(ANALYSIS_COLUMNS);
    ctx.write_csv("anova_features.csv", &header, &rows, &mut out)?;

    let mut rows = Vec::new();
    for f in PerceivedFeature::ALL {
        for c in ConditionLabel::ALL {
            let mut row = vec![f.to_string(), c.to_string()];
            match experience_analysis_with(&table, f, c, alpha, settings.method) {
                Ok(a) => row.extend(analysis_cells(&a, alpha)),
                Err(e) => {
                    out.row_error("anova-experience", format!("{f}/{c}"), &e);
                    row.extend(std::iter::repeat_n(
                        String::new(),
                        ANALYSIS_COLUMNS.len() - 1,
                    ));
                    row.push(e.to_string());
                }
            }
            rows.push(row);
        }
    }
    let mut header = vec!["feature", "condition"];
    header.extend(ANALYSIS_COLUMNS);
    ctx.write_csv("anova_experience.csv", &header, &rows, &mut out)?;
    Ok(out)
}

enum CellInput {
    Spec(WindowSpec),
    Archive(PathBuf),
}

struct Cell {
    variant: Variant,
    input: CellInput,
}

fn cell_data(ctx: &Context, corpus: &Option<Corpus>, cell: &Cell) -> Result<(WindowSpec, Dataset)> {
    let center = ctx.config.train.center_windows;
    let with_participants = |d: Dataset, sources: &[usize]| -> Result<Dataset> {
        match corpus {
            Some(c) => d.with_groups(sources.iter().map(|&s| c.participant_of[s]).collect()),
            None => Ok(d),
        }
    };
    match &cell.input {
        CellInput::Spec(spec) => {
            let corpus = corpus.as_ref().expect("corpus loaded for spec cells");
            let ws: WindowSet = segment(&corpus.series, *spec)?;
            let data = match cell.variant {
                Variant::Raw1D => Dataset::from_windows(&ws, center)?,
                Variant::Gaf2D => Dataset::from_gaf(&encode_set(&ws, &ctx.config.encode)?)?,
            };
            Ok((*spec, with_participants(data, ws.sources())?))
        }
        CellInput::Archive(path) => {
            let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
            match read_archive(&bytes).map_err(|e| e.in_file(path))? {
                Archive::Windows(ws) => Ok((ws.spec(), Dataset::from_windows(&ws, center)?)),
                Archive::Gaf(g) => Ok((g.spec, Dataset::from_gaf(&g)?)),
            }
        }
    }
}

fn curve_rows(r: &TrainReport) -> Vec<Vec<String>> {
    r.epochs
        .iter()
        .map(|e| {
            vec![
                e.epoch.to_string(),
                num(e.train_loss),
                num(e.train_accuracy),
                num(e.val_accuracy),
            ]
        })
        .collect()
}

/// Train one model per (spec, variant) cell. Cell `i` is seeded with
/// `seed ^ i`.
pub fn cmd_train_sweep(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let mut cells = Vec::new();
    if cfg.sweep.archives.is_empty() {
        for spec in specs(&cfg.sweep.raw)? {
            cells.push(Cell {
                variant: Variant::Raw1D,
                input: CellInput::Spec(spec),
            });
        }
        for spec in specs(&cfg.sweep.gaf)? {
            cells.push(Cell {
                variant: Variant::Gaf2D,
                input: CellInput::Spec(spec),
            });
        }
    } else {
        for path in &cfg.sweep.archives {
            let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
            let variant = match read_archive(&bytes) {
                Ok(Archive::Gaf(_)) => Variant::Gaf2D,
                _ => Variant::Raw1D,
            };
            cells.push(Cell {
                variant,
                input: CellInput::Archive(path.clone()),
            });
        }
    }
    if cells.is_empty() {
        return Err(Error::Config("sweep list is empty".into()));
    }
    let corpus = if cfg.sweep.archives.is_empty() {
        Some(load_corpus(cfg)?)
    } else {
        None
    };

    let mut out = Outcome::default();
    let mut summary = Vec::new();
    let mut trend: BTreeMap<Variant, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, cell) in cells.iter().enumerate() {
        let seed = cfg.seed ^ i as u64;
        let item = match &cell.input {
            CellInput::Spec(s) => format!("{}_{}", cell.variant, spec_name(*s)),
            CellInput::Archive(p) => format!(
                "{}_{}",
                cell.variant,
                p.file_stem().unwrap_or_default().to_string_lossy()
            ),
        };
        let result = cell_data(ctx, &corpus, cell).and_then(|(spec, data)| {
            let mc = ModelConfig::for_variant(cell.variant, data.sample_shape()[0], seed);
            let trained = train(&mc, &cfg.train.train_config(seed), &data)?;
            Ok((spec, data.len(), trained))
        });
        match result {
            Ok((spec, n, trained)) => {
                let r = &trained.report;
                let acc = r.test_accuracy().unwrap_or(f64::NAN);
                let eff = effective_length(&spec);
                ctx.write_csv(
                    &format!("curves_{item}.csv"),
                    &["epoch", "train_loss", "train_accuracy", "val_accuracy"],
                    &curve_rows(r),
                    &mut out,
                )?;
                let series = [
                    Series {
                        name: "train accuracy",
                        color: "#1f77b4",
                        points: r
                            .epochs
                            .iter()
                            .map(|e| (e.epoch as f64, e.train_accuracy))
                            .collect(),
                    },
                    Series {
                        name: "validation accuracy",
                        color: "#ff7f0e",
                        points: r
                            .epochs
                            .iter()
                            .map(|e| (e.epoch as f64, e.val_accuracy))
                            .collect(),
                    },
                ];
                let title = format!(
                    "{} p={} j={}: test accuracy {:.4}",
                    cell.variant, spec.window_len, spec.stride, acc
                );
                let svg = line_chart(
                    &title,
                    "epoch",
                    "accuracy",
                    (0.0, 1.0),
                    &series,
                    ctx.stamp().as_deref(),
                );
                ctx.write(&format!("curves_{item}.svg"), svg.as_bytes(), &mut out)?;
                ctx.write(
                    &format!("model_{item}.bin"),
                    &trained.model.to_bytes(),
                    &mut out,
                )?;
                trend.entry(cell.variant).or_default().push((eff, acc));
                out.messages.push(format!(
                    "{item}: effective length {eff}, test accuracy {acc:.4} ({:.1}s)",
                    r.wall_clock_s
                ));
                summary.push(vec![
                    i.to_string(),
                    cell.variant.to_string(),
                    spec.window_len.to_string(),
                    spec.stride.to_string(),
                    num(eff),
                    n.to_string(),
                    num(acc),
                    r.epochs.len().to_string(),
                    format!("{:?}", r.stop_reason),
                    String::new(),
                ]);
            }
            Err(e) => {
                out.row_error("train-sweep", item.clone(), &e);
                let mut row = vec![i.to_string(), cell.variant.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(e.to_string());
                summary.push(row);
            }
        }
    }
    ctx.write_csv(
        "sweep_summary.csv",
        &[
            "cell",
            "variant",
            "p",
            "j",
            "effective_length",
            "windows",
            "test_accuracy",
            "epochs_run",
            "stop_reason",
            "error",
        ],
        &summary,
        &mut out,
    )?;

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (variant, pts) in &mut trend {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (eff, acc) in pts.iter() {
            rows.push(vec![variant.to_string(), num(*eff), num(*acc)]);
        }
        series.push(Series {
            name: if *variant == Variant::Raw1D {
                "raw1d"
            } else {
                "gaf2d"
            },
            color: if *variant == Variant::Raw1D {
                "#1f77b4"
            } else {
                "#2ca02c"
            },
            points: pts.clone(),
        });
    }
    ctx.write_csv(
        "accuracy_vs_effective_length.csv",
        &["variant", "effective_length", "test_accuracy"],
        &rows,
        &mut out,
    )?;
    let svg = line_chart(
        "Test accuracy against effective length",
        "effective length (j/p)",
        "test accuracy",
        (0.0, 1.0),
        &series,
        ctx.stamp().as_deref(),
    );
    ctx.write("accuracy_vs_effective_length.svg", svg.as_bytes(), &mut out)?;
    Ok(out)
}

/// Every command in sequence on one config.
pub fn cmd_demo(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.merge(cmd_segment(ctx)?);
    out.merge(cmd_encode(ctx)?);
    out.merge(cmd_stationarity(ctx)?);
    out.merge(cmd_anova(ctx)?);
    out.merge(cmd_train_sweep(ctx)?);
    Ok(out)
}
