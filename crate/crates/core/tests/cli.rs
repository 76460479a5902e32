//! End-to-end checks of the `htm-anomaly` binary: exit codes, file formats,
//! determinism and scoring through the command line.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{DateTime, Duration, Utc};
use htm_anomaly::harness::{self, CONFIG_ENV};
use htm_anomaly::nab::{self, Labels};
use htm_anomaly::series::{self, Record, ScoredRecord};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_htm-anomaly"));
    c.env_remove(CONFIG_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn t0() -> DateTime<Utc> {
    DateTime::<Utc>::from_timestamp(1_704_067_200, 0).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.conf");
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["run"])), 1, "no config given");
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);

    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "output_dir = out\n");
    let o = run(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("corpus_dir"), "{}", stderr(&o));

    let corpus = d.path().join("c");
    std::fs::create_dir(&corpus).unwrap();
    let cfg = write_config(d.path(), &format!("corpus_dir = {}\noutput_dir = out\nbogus_key = 1\n", s(&corpus)));
    assert_eq!(code(&run(&["run", "--config", s(&cfg)])), 1);
    let cfg = write_config(d.path(), &format!("corpus_dir = {}\noutput_dir = out\ndetector = lstm\n", s(&corpus)));
    assert_eq!(code(&run(&["run", "--config", s(&cfg)])), 1);
}

#[test]
fn wrong_header_is_data_error_naming_file_and_line() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("c");
    std::fs::create_dir(&corpus).unwrap();
    std::fs::write(corpus.join("bad.csv"), "time,value\n2024-01-01T00:00:00Z,1\n").unwrap();
    let cfg =
        write_config(d.path(), &format!("corpus_dir = {}\noutput_dir = {}\n", s(&corpus), s(&d.path().join("out"))));
    let o = run(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("bad.csv:1") && err.contains("timestamp,value"), "{err}");
}

#[test]
fn tiny_file_runs_via_env_config() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("c");
    let records: Vec<Record> =
        (0..3).map(|i| Record { timestamp: t0() + Duration::seconds(i), value: i as f64 }).collect();
    series::write_series(&corpus.join("three.csv"), &records).unwrap();
    let out = d.path().join("out");
    let cfg = write_config(d.path(), &format!("corpus_dir = {}\noutput_dir = {}\n", s(&corpus), s(&out)));
    let o = bin().env(CONFIG_ENV, &cfg).arg("run").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let scores = series::read_scores(&out.join("three.csv")).unwrap();
    assert_eq!(scores.len(), 3);
    assert!(scores.iter().all(|r| (0.0..=1.0).contains(&r.anomaly_score)));
    let manifest = harness::Manifest::read(&out.join(harness::MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.files.len(), 1);
    assert_eq!(manifest.files[0].train_len, 0);

    let o = run(&["inspect", s(&out.join("three.csv"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn synth_run_is_deterministic_and_resumable() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("corpus");
    let o = run(&["synth", "generate", "--out", s(&corpus), "--files", "2", "--duration", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let labels = corpus.join(harness::LABELS_FILE);
    assert!(labels.is_file());

    let run_into = |name: &str, extra: &[&str]| {
        let out = d.path().join(name);
        let cfg = write_config(
            d.path(),
            &format!("corpus_dir = {}\noutput_dir = {}\nlabels_path = {}\nseed = 3\n", s(&corpus), s(&out), s(&labels)),
        );
        let mut args = vec!["run", "--config", s(&cfg)];
        args.extend_from_slice(extra);
        let o = bin().args(&args).output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        out
    };
    let models = d.path().join("models");
    let a = run_into("a", &["--save-model", s(&models)]);
    let b = run_into("b", &[]);
    for f in ["run_00.csv", "run_01.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join(harness::RESULTS_FILE).is_file());
    assert!(a.join(harness::TABLE_FILE).is_file());

    let model = models.join("run_00.csv.model.json");
    let o = run(&["inspect", s(&model)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let warm = run_into("warm", &["--load-model", s(&model)]);
    let manifest = harness::Manifest::read(&warm.join(harness::MANIFEST_FILE)).unwrap();
    assert!(manifest.warm_start_model.is_some());

    // A model file from another format version is rejected as bad data.
    let text = std::fs::read_to_string(&model).unwrap();
    let stale = d.path().join("stale.json");
    let bumped = text.replacen("\"version\":1,", "\"version\":99,", 1);
    assert_ne!(bumped, text);
    std::fs::write(&stale, bumped).unwrap();
    let out = d.path().join("never");
    let cfg = write_config(d.path(), &format!("corpus_dir = {}\noutput_dir = {}\n", s(&corpus), s(&out)));
    let o = run(&["run", "--config", s(&cfg), "--load-model", s(&stale)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn score_normalizes_null_and_oracle() {
    let d = tempfile::tempdir().unwrap();
    let mut labels = Labels::new();
    let null_dir = d.path().join("null");
    let oracle_dir = d.path().join("oracle");
    for (name, n, at) in [("a.csv", 400usize, vec![100usize, 300]), ("b.csv", 300, vec![150])] {
        let stamps: Vec<_> = (0..n).map(|i| t0() + Duration::seconds(i as i64)).collect();
        let label_ts: Vec<_> = at.iter().map(|&i| stamps[i]).collect();
        let windows = nab::make_windows(&label_ts, &stamps, nab::DEFAULT_WINDOW_BUDGET, name).unwrap();
        let starts: Vec<_> = windows.iter().map(|w| w.start).collect();
        labels.insert(name.to_string(), label_ts);
        let scored = |f: &dyn Fn(usize) -> f64| -> Vec<ScoredRecord> {
            stamps
                .iter()
                .enumerate()
                .map(|(i, &timestamp)| ScoredRecord { timestamp, value: 0.0, anomaly_score: f(i) })
                .collect()
        };
        series::write_scores(&null_dir.join(name), &scored(&|_| 0.5)).unwrap();
        let oracle = scored(&|i| if starts.contains(&stamps[i]) { 1.0 } else { 0.0 });
        series::write_scores(&oracle_dir.join(name), &oracle).unwrap();
    }
    let labels_path = d.path().join("labels.json");
    nab::write_labels(&labels_path, &labels).unwrap();
    let out = d.path().join("scored");
    let o = run(&[
        "score",
        "--scores",
        s(&null_dir),
        s(&oracle_dir),
        "--labels",
        s(&labels_path),
        "--profiles",
        "standard,low_fn",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let results = nab::read_results(&out.join(harness::RESULTS_FILE)).unwrap();
    assert_eq!(results.len(), 4);
    for r in &results {
        let expected = if r.detector == "oracle" { 100.0 } else { 0.0 };
        assert!((r.normalized_score - expected).abs() < 1e-9, "{r:?}");
    }

    // A labelled file without scores is a data error.
    std::fs::remove_file(null_dir.join("b.csv")).unwrap();
    let o = run(&["score", "--scores", s(&null_dir), "--labels", s(&labels_path)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}
