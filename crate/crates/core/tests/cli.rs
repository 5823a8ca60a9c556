use std::path::Path;
use std::process::{Command, Output};

use bvpkit::ingest::{write_e4_bvp, TimeSeries};
use bvpkit::nn::{Container, ContainerKind};
use bvpkit::signals::white_noise;

fn bvpkit(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_bvpkit"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

/// Data lines of an output CSV, without the config-hash comment or header.
fn records(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn segment_reports_window_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvpkit(dir.path(), "", &["segment"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("228 windows, effective length 0.25"),
        "{stdout}"
    );
    let rows = records(&read(dir.path(), "segment_summary.csv"));
    assert_eq!(rows, vec![vec!["512", "128", "0.25", "228", "0"]]);
}

#[test]
fn segment_archives_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "windows = [[512, 128], [256, 64]]\n";
    assert!(bvpkit(a.path(), cfg, &["segment", "--seed", "3"])
        .status
        .success());
    assert!(bvpkit(b.path(), cfg, &["segment", "--seed", "3"])
        .status
        .success());
    for name in [
        "windows_p512_j128.bin",
        "windows_p256_j64.bin",
        "segment_summary.csv",
    ] {
        let x = std::fs::read(a.path().join("out").join(name)).unwrap();
        let y = std::fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn window_longer_than_every_session_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvpkit(dir.path(), "windows = [[10000, 100]]\n", &["segment"]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("no spec produced any windows"),
        "{}",
        stderr(&out)
    );
}

fn write_manifest(dir: &Path, sessions: &[(&str, Vec<f64>)]) -> String {
    let mut manifest = String::from("path,participant,condition,experience\n");
    for (cond, samples) in sessions {
        let name = format!("s_{cond}.csv");
        let ts = TimeSeries::new(samples.clone(), 64.0, 1.6e9).unwrap();
        std::fs::write(dir.join(&name), write_e4_bvp(&ts)).unwrap();
        manifest.push_str(&format!("{name},P01,{cond},1\n"));
    }
    std::fs::write(dir.join("manifest.csv"), manifest).unwrap();
    "manifest = \"manifest.csv\"\n".into()
}

#[test]
fn white_noise_sessions_are_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let sessions: Vec<(&str, Vec<f64>)> = ["A", "B", "C", "D"]
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, white_noise(800, 50 + i as u64)))
        .collect();
    let cfg = write_manifest(dir.path(), &sessions);
    let out = bvpkit(dir.path(), &cfg, &["stationarity"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = records(&read(dir.path(), "stationarity.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[11], "stationary", "{r:?}");
    }
    let table = records(&read(dir.path(), "stationarity_table.csv"));
    assert_eq!(table.len(), 2);
}

#[test]
fn synthetic_sessions_show_the_trend_stationary_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvpkit(dir.path(), "", &["stationarity"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = records(&read(dir.path(), "stationarity_table.csv"));
    assert_eq!(table[0], vec!["ADF", "0.1", "0.1", "0.1", "0.1"]);
    assert_eq!(table[1], vec!["KPSS", "0.01", "0.01", "0.01", "0.01"]);
}

#[test]
fn constant_session_is_flagged_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let sessions = vec![("A", white_noise(500, 1)), ("B", vec![2.5; 500])];
    let cfg = write_manifest(dir.path(), &sessions);
    let out = bvpkit(dir.path(), &cfg, &["stationarity"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let rows = records(&read(dir.path(), "stationarity.csv"));
    assert_eq!(rows[1][0], "B");
    assert_eq!(rows[1][11], "degenerate");
    let errors = read(dir.path(), "errors.json");
    assert!(errors.contains("\"item\": \"B\""), "{errors}");
}

#[test]
fn anova_on_bundled_scores() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvpkit(dir.path(), "", &["anova"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = records(&read(dir.path(), "anova_features.csv"));
    let significant: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r[0].as_str(), r[8].as_str()))
        .collect();
    assert_eq!(
        significant,
        [
            ("PS", "true"),
            ("AP", "true"),
            ("AM", "true"),
            ("LK", "true"),
            ("PI", "false")
        ]
    );
    assert_eq!(rows[0][9], "B>A>C>D");
    assert_eq!(records(&read(dir.path(), "anova_experience.csv")).len(), 20);
}

fn scores_csv(rows: impl Iterator<Item = (usize, char, f64)>) -> String {
    let mut s = String::from("participant,condition,experience,feature,score\n");
    for (p, c, v) in rows {
        for f in ["PS", "AP", "AM", "LK", "PI"] {
            s.push_str(&format!("P{p},{c},{},{f},{v}\n", (p / 4) % 4));
        }
    }
    s
}

#[test]
fn single_condition_scores_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("scores.csv"),
        scores_csv((0..8).map(|p| (p, 'A', 3.0 + p as f64))),
    )
    .unwrap();
    let out = bvpkit(dir.path(), "[anova]\nscores = \"scores.csv\"\n", &["anova"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("no PS scores for condition B"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn identical_scores_give_p_of_one() {
    let dir = tempfile::tempdir().unwrap();
    let rows = (0..32).map(|p| (p, ['A', 'B', 'C', 'D'][p % 4], 4.0));
    std::fs::write(dir.path().join("scores.csv"), scores_csv(rows)).unwrap();
    let out = bvpkit(dir.path(), "[anova]\nscores = \"scores.csv\"\n", &["anova"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for r in records(&read(dir.path(), "anova_features.csv")) {
        assert_eq!(r[7].parse::<f64>().unwrap(), 1.0, "{r:?}");
    }
}

#[test]
fn empty_archive_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = Container {
        kind: ContainerKind::WindowArchive,
        config: r#"{"window_len":64,"stride":32}"#.into(),
        tensors: Vec::new(),
    }
    .to_bytes();
    std::fs::write(dir.path().join("empty.bin"), bytes).unwrap();
    let out = bvpkit(
        dir.path(),
        "[sweep]\narchives = [\"empty.bin\"]\n",
        &["train-sweep"],
    );
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("archive holds 0 tensors"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn train_sweep_writes_curves_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[train]\nepochs = 2\n[encode]\npaa_size = 16\n[sweep]\nraw = [[512, 128], [512, 200], [256, 128]]\ngaf = [[512, 128]]\n";
    let out = bvpkit(dir.path(), cfg, &["train-sweep", "--deterministic"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = records(&read(dir.path(), "sweep_summary.csv"));
    let eff: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(eff, ["0.25", "0.390625", "0.5", "0.25"]);
    let curves = records(&read(dir.path(), "curves_raw1d_p512_j200.csv"));
    assert_eq!(curves.len(), 2);
    let svg = read(dir.path(), "curves_gaf2d_p512_j128.svg");
    assert!(svg.contains("<polyline") && !svg.contains("<!--"));
    assert!(dir.path().join("out/model_raw1d_p256_j128.bin").exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvpkit(dir.path(), "sead = 3\n", &["segment"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sead"), "{}", stderr(&out));
}
