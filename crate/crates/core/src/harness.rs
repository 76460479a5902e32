//! Experiment harness behind the `htm-anomaly` binary: configuration files,
//! corpus runs, benchmark scoring, corpus synthesis and file inspection.
//!
//! # Configuration grammar
//!
//! One `key = value` per line. `#` starts a comment; blank lines are
//! ignored; later lines override earlier ones, and `--set key=value` flags
//! override the file. Relative paths resolve against the working directory.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `corpus_dir` | directory of `*.csv` series | required |
//! | `output_dir` | where scores and the manifest go | required |
//! | `labels_path` | labels JSON; when set, `run` also scores | none |
//! | `detector` | `htm_hd`, `htm_raw`, `windowed_gaussian`, `threshold`, `random`, `null` | `htm_hd` |
//! | `detector.<param>` | detector parameter, e.g. `detector.sp.n_columns` | |
//! | `train_fraction` | training prefix per file | `0.15` |
//! | `profiles` | comma list of `standard`, `low_fp`, `low_fn` | all three |
//! | `window_budget` | share of each file covered by windows | `0.10` |
//! | `subsample` | keep every k-th record | `1` |
//! | `threads` | worker threads, 0 = one per core | `0` |
//! | `seed` | detector seed | `0` |

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detectors::{self, Detector, DetectorConfig, DetectorKind, DetectorOutput, HtmDetector};
use crate::error::{Error, Result};
use crate::nab::{self, BenchmarkResult, Labels, ScoringProfile, Windows};
use crate::psd_synth::{self, CorpusSpec, Sampled, SynthSpec, Taper};
use crate::series::{self, Record, ScoredRecord};

/// Environment variable naming the default configuration file for `run`.
pub const CONFIG_ENV: &str = "HTM_ANOMALY_CONFIG";

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.json";
pub const WINDOWS_FILE: &str = "windows.json";
pub const TABLE_FILE: &str = "table.txt";
pub const LABELS_FILE: &str = "labels.json";

pub const MODEL_FORMAT: &str = "htm-anomaly-model";
pub const MODEL_VERSION: u32 = 1;

const TOP_LEVEL_KEYS: [&str; 10] = [
    "corpus_dir",
    "output_dir",
    "labels_path",
    "detector",
    "train_fraction",
    "profiles",
    "window_budget",
    "subsample",
    "threads",
    "seed",
];

/// Raw key/value entries, in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigMap(map))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        self.0.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    /// Canonical `key = value` text; its SHA-256 identifies the run.
    pub fn canonical(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn sha256(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub labels_path: Option<PathBuf>,
    pub detector: DetectorConfig,
    pub train_fraction: f64,
    pub profiles: Vec<ScoringProfile>,
    pub window_budget: f64,
    pub subsample: usize,
    pub threads: usize,
    pub seed: u64,
}

fn parse_value<T: std::str::FromStr>(map: &ConfigMap, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`"))),
    }
}

pub fn parse_profiles(list: &str) -> Result<Vec<ScoringProfile>> {
    let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(Error::Config("at least one scoring profile is required".into()));
    }
    names.into_iter().map(ScoringProfile::by_name).collect()
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        for key in map.entries().keys() {
            if !TOP_LEVEL_KEYS.contains(&key.as_str()) && !key.starts_with("detector.") {
                return Err(Error::Config(format!("unknown configuration key `{key}`")));
            }
        }
        let required =
            |key: &str| map.get(key).map(PathBuf::from).ok_or_else(|| Error::Config(format!("`{key}` is required")));
        let seed = parse_value(map, "seed", 0u64)?;
        let kind: DetectorKind = map.get("detector").unwrap_or("htm_hd").parse()?;
        let mut detector = DetectorConfig::new(kind).with_seed(seed);
        for (k, v) in map.entries() {
            if let Some(param) = k.strip_prefix("detector.") {
                detector.params.insert(param.to_string(), v.clone());
            }
        }
        let cfg = RunConfig {
            corpus_dir: required("corpus_dir")?,
            output_dir: required("output_dir")?,
            labels_path: map.get("labels_path").map(PathBuf::from),
            detector,
            train_fraction: parse_value(map, "train_fraction", detectors::DEFAULT_TRAIN_FRACTION)?,
            profiles: parse_profiles(map.get("profiles").unwrap_or("standard,low_fp,low_fn"))?,
            window_budget: parse_value(map, "window_budget", nab::DEFAULT_WINDOW_BUDGET)?,
            subsample: parse_value(map, "subsample", 1usize)?,
            threads: parse_value(map, "threads", 0usize)?,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.train_fraction) {
            return Err(Error::Config(format!("train_fraction must be in [0, 1), got {}", self.train_fraction)));
        }
        if !(self.window_budget > 0.0 && self.window_budget < 1.0) {
            return Err(Error::Config("window_budget must be in (0, 1)".into()));
        }
        if self.subsample == 0 {
            return Err(Error::Config("subsample must be at least 1".into()));
        }
        if !self.corpus_dir.is_dir() {
            return Err(Error::Config(format!("corpus_dir {} is not a directory", self.corpus_dir.display())));
        }
        if let Some(p) = &self.labels_path {
            if !p.is_file() {
                return Err(Error::Config(format!("labels_path {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

/// `*.csv` files directly inside `dir`, by name.
pub fn list_series(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Keeps every `k`-th record, starting with the first.
pub fn subsample(records: Vec<Record>, k: usize) -> Vec<Record> {
    if k <= 1 {
        return records;
    }
    records.into_iter().step_by(k).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub records: usize,
    pub train_len: usize,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub config: BTreeMap<String, String>,
    pub detector: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start_model: Option<String>,
    pub files: Vec<FileEntry>,
    pub runtime_s: f64,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_json_as(path, value, true)
}

fn write_json_as<T: Serialize + ?Sized>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) };
    let mut text = text.map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct ModelFile {
    detector: HtmDetector,
}

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'a str,
    version: u32,
    detector: &'a HtmDetector,
}

pub fn save_model(path: &Path, htm: &HtmDetector) -> Result<()> {
    // Compact: the proximal permanences alone run to millions of numbers.
    write_json_as(path, &ModelFileRef { format: MODEL_FORMAT, version: MODEL_VERSION, detector: htm }, false)
}

pub fn load_model(path: &Path) -> Result<HtmDetector> {
    #[derive(Deserialize)]
    struct Head {
        format: Option<String>,
        version: Option<u64>,
    }
    let json = |source| Error::Json { path: path.to_path_buf(), source };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let head: Head = serde_json::from_str(&text).map_err(json)?;
    if head.format.as_deref() != Some(MODEL_FORMAT) {
        return Err(Error::Input(format!("{} is not a model file", path.display())));
    }
    if head.version != Some(MODEL_VERSION as u64) {
        return Err(Error::Input(format!(
            "{}: model format version {:?}, this build reads {MODEL_VERSION}",
            path.display(),
            head.version
        )));
    }
    // Parsed from the text itself: the bit sets deserialize from borrowed bytes.
    let file: ModelFile = serde_json::from_str(&text).map_err(json)?;
    Ok(file.detector)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory receiving one model file per series (HTM detectors only).
    pub save_model: Option<PathBuf>,
    /// Model every series starts from instead of a fresh detector.
    pub load_model: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outputs: Vec<(String, DetectorOutput)>,
    pub manifest: Manifest,
    pub results: Option<Vec<BenchmarkResult>>,
}

/// Runs the configured detector over every series of the corpus, writes one
/// score file per series plus a manifest, and scores the run when labels
/// are configured.
pub fn cmd_run(map: &ConfigMap, opts: &RunOptions) -> Result<RunSummary> {
    let cfg = RunConfig::from_map(map)?;
    let warm = match &opts.load_model {
        Some(p) => {
            if !matches!(cfg.detector.kind, DetectorKind::HtmHd | DetectorKind::HtmRaw) {
                return Err(Error::Config("--load-model needs an HTM detector".into()));
            }
            Some(load_model(p)?)
        }
        None => None,
    };
    if opts.save_model.is_some() && !matches!(cfg.detector.kind, DetectorKind::HtmHd | DetectorKind::HtmRaw) {
        return Err(Error::Config("--save-model needs an HTM detector".into()));
    }
    let files = list_series(&cfg.corpus_dir)?;
    if files.is_empty() {
        return Err(Error::Input(format!("no .csv files in {}", cfg.corpus_dir.display())));
    }
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().map_err(|e| Error::Config(e.to_string()))?;
    let started = Instant::now();
    let runs: Vec<Result<(String, DetectorOutput, Option<HtmDetector>, f64)>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let name = file_name(path);
                let records = subsample(series::read_series(path)?, cfg.subsample);
                let clock = Instant::now();
                let (out, detector) = match &warm {
                    Some(htm) => {
                        let mut d = Detector::from_htm(htm.clone());
                        if records.is_empty() {
                            return Err(Error::Input(format!("{name}: empty series")));
                        }
                        let n_train = detectors::train_len(records.len(), cfg.train_fraction);
                        (detectors::stream(&mut d, &records, n_train)?, d)
                    }
                    None => detectors::run_with(&cfg.detector, &records, cfg.train_fraction, |_| Ok(()))?,
                };
                let runtime = clock.elapsed().as_secs_f64();
                let keep = opts.save_model.as_ref().and(detector.into_htm());
                Ok((name, out, keep, runtime))
            })
            .collect()
    });

    let mut outputs = Vec::with_capacity(runs.len());
    let mut entries = Vec::with_capacity(runs.len());
    for run in runs {
        let (name, out, model, runtime) = run?;
        let scored: Vec<ScoredRecord> = out
            .timestamps
            .iter()
            .zip(&out.values)
            .zip(&out.scores)
            .map(|((&timestamp, &value), &anomaly_score)| ScoredRecord { timestamp, value, anomaly_score })
            .collect();
        series::write_scores(&cfg.output_dir.join(&name), &scored)?;
        if let (Some(dir), Some(htm)) = (&opts.save_model, model) {
            save_model(&dir.join(format!("{name}.model.json")), &htm)?;
        }
        entries.push(FileEntry {
            name: name.clone(),
            records: out.len(),
            train_len: out.train_len,
            runtime_s: runtime,
        });
        outputs.push((name, out));
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: map.sha256(),
        config: map.entries().clone(),
        detector: cfg.detector.kind.to_string(),
        seed: cfg.seed,
        warm_start_model: opts.load_model.as_ref().map(|p| p.display().to_string()),
        runtime_s: entries.iter().map(|e| e.runtime_s).sum(),
        files: entries,
    };
    let _ = started;
    write_json(&cfg.output_dir.join(MANIFEST_FILE), &manifest)?;

    let results = match &cfg.labels_path {
        Some(labels_path) => {
            let labels = nab::read_labels(labels_path)?;
            let (results, windows) = score_outputs(
                &manifest.detector,
                &outputs,
                &labels,
                &cfg.profiles,
                cfg.window_budget,
                Some(manifest.runtime_s),
            )?;
            write_scoring(&cfg.output_dir, &results, &windows)?;
            Some(results)
        }
        None => None,
    };
    Ok(RunSummary { outputs, manifest, results })
}

/// Windows from labels, then one optimised result per profile.
pub fn score_outputs(
    detector: &str,
    outputs: &[(String, DetectorOutput)],
    labels: &Labels,
    profiles: &[ScoringProfile],
    window_budget: f64,
    runtime_s: Option<f64>,
) -> Result<(Vec<BenchmarkResult>, Windows)> {
    if profiles.is_empty() {
        return Err(Error::Config("at least one scoring profile is required".into()));
    }
    for name in labels.keys() {
        if !outputs.iter().any(|(n, _)| n == name) {
            return Err(Error::Input(format!("no score file for labelled series `{name}`")));
        }
    }
    let mut windows = Windows::new();
    for (name, out) in outputs {
        let ws = match labels.get(name) {
            Some(l) => nab::make_windows(l, &out.timestamps, window_budget, name)?,
            None => Vec::new(),
        };
        windows.insert(name.clone(), ws);
    }
    let runs: Vec<(&DetectorOutput, &[nab::AnomalyWindow])> =
        outputs.iter().map(|(name, out)| (out, windows[name].as_slice())).collect();
    let results = profiles
        .iter()
        .map(|p| {
            let mut r = nab::evaluate(detector, &runs, p)?;
            r.runtime_s = runtime_s;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((results, windows))
}

fn write_scoring(dir: &Path, results: &[BenchmarkResult], windows: &Windows) -> Result<()> {
    nab::write_results(&dir.join(RESULTS_FILE), results)?;
    nab::write_windows(&dir.join(WINDOWS_FILE), windows)?;
    std::fs::write(dir.join(TABLE_FILE), nab::render_table(results)).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct ScoreOptions {
    pub scores_dirs: Vec<PathBuf>,
    pub labels_path: PathBuf,
    pub profiles: Vec<ScoringProfile>,
    pub window_budget: f64,
    pub out_dir: Option<PathBuf>,
}

/// Scores one or more score directories (one detector each) against a label
/// set. Detector names and runtimes come from each directory's manifest
/// when present.
pub fn cmd_score(opts: &ScoreOptions) -> Result<Vec<BenchmarkResult>> {
    if opts.profiles.is_empty() {
        return Err(Error::Config("at least one scoring profile is required".into()));
    }
    if opts.scores_dirs.is_empty() {
        return Err(Error::Config("at least one scores directory is required".into()));
    }
    let labels = nab::read_labels(&opts.labels_path)?;
    let mut all = Vec::new();
    let mut last_windows = Windows::new();
    for dir in &opts.scores_dirs {
        let manifest = Manifest::read(&dir.join(MANIFEST_FILE)).ok();
        let detector = manifest.as_ref().map(|m| m.detector.clone()).unwrap_or_else(|| file_name(dir));
        let outputs = list_series(dir)?
            .iter()
            .map(|p| {
                let rows = series::read_scores(p)?;
                Ok((
                    file_name(p),
                    DetectorOutput {
                        timestamps: rows.iter().map(|r| r.timestamp).collect(),
                        values: rows.iter().map(|r| r.value).collect(),
                        scores: rows.iter().map(|r| r.anomaly_score).collect(),
                        train_len: 0,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (results, windows) = score_outputs(
            &detector,
            &outputs,
            &labels,
            &opts.profiles,
            opts.window_budget,
            manifest.map(|m| m.runtime_s),
        )?;
        all.extend(results);
        last_windows = windows;
    }
    if let Some(out) = opts.out_dir.as_ref().or(opts.scores_dirs.first()) {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        write_scoring(out, &all, &last_windows)?;
    }
    Ok(all)
}

/// Writes a generated corpus: one CSV per run plus `labels.json`.
pub fn write_corpus(dir: &Path, files: &[psd_synth::SynthFile]) -> Result<Labels> {
    let mut labels = Labels::new();
    for f in files {
        series::write_series(&dir.join(&f.name), &f.records)?;
        labels.insert(f.name.clone(), f.labels.clone());
    }
    nab::write_labels(&dir.join(LABELS_FILE), &labels)?;
    Ok(labels)
}

/// Sample rate implied by evenly spaced timestamps.
pub fn sample_rate_of(records: &[Record]) -> Result<f64> {
    match (records.first(), records.last()) {
        (Some(a), Some(b)) if records.len() > 1 => {
            let span = series::seconds_between(&a.timestamp, &b.timestamp);
            if span > 0.0 {
                Ok((records.len() - 1) as f64 / span)
            } else {
                Err(Error::Input("series spans zero time".into()))
            }
        }
        _ => Err(Error::Input("need at least two records to infer a sample rate".into())),
    }
}

/// Maps `source`'s band-power trajectory onto `target` and writes the result
/// with the target's timestamps. Source labels, if given, are shifted onto
/// the target's time axis.
pub fn synth_map(
    source: &Path,
    target: &Path,
    out: &Path,
    spec: &SynthSpec,
    source_labels: Option<&[chrono::DateTime<chrono::Utc>]>,
) -> Result<Vec<chrono::DateTime<chrono::Utc>>> {
    let b = series::read_series(source)?;
    let p = series::read_series(target)?;
    let (rb, rp) = (sample_rate_of(&b)?, sample_rate_of(&p)?);
    let bv: Vec<f64> = b.iter().map(|r| r.value).collect();
    let pv: Vec<f64> = p.iter().map(|r| r.value).collect();
    let mapped =
        psd_synth::psd_map(Sampled { samples: &bv, sample_rate: rb }, Sampled { samples: &pv, sample_rate: rp }, spec)?;
    let records: Vec<Record> =
        p.iter().zip(mapped).map(|(r, value)| Record { timestamp: r.timestamp, value }).collect();
    series::write_series(out, &records)?;
    let shift = p[0].timestamp - b[0].timestamp;
    let last = p[p.len() - 1].timestamp;
    Ok(source_labels.unwrap_or_default().iter().map(|t| *t + shift).filter(|t| *t <= last).collect())
}

fn describe(values: &[f64]) -> String {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("min {min:.6}  max {max:.6}  mean {mean:.6}  sd {sd:.6}")
}

/// Human-readable summary of a series, score, labels, results or model file.
pub fn cmd_inspect(path: &Path) -> Result<String> {
    let mut out = String::new();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    if ext == "csv" {
        let head = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let first = head.lines().next().unwrap_or_default().trim();
        if first == series::SCORES_HEADER.join(",") {
            let rows = series::read_scores(path)?;
            let _ = writeln!(out, "scores file {} with {} records", path.display(), rows.len());
            if let (Some(a), Some(b)) = (rows.first(), rows.last()) {
                let _ = writeln!(
                    out,
                    "span      {} .. {}",
                    series::format_timestamp(&a.timestamp),
                    series::format_timestamp(&b.timestamp)
                );
                let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
                let s: Vec<f64> = rows.iter().map(|r| r.anomaly_score).collect();
                let _ = writeln!(out, "value     {}", describe(&v));
                let _ = writeln!(out, "score     {}", describe(&s));
            }
        } else {
            let rows = series::read_series(path)?;
            let _ = writeln!(out, "series file {} with {} records", path.display(), rows.len());
            if let (Some(a), Some(b)) = (rows.first(), rows.last()) {
                let _ = writeln!(
                    out,
                    "span      {} .. {}",
                    series::format_timestamp(&a.timestamp),
                    series::format_timestamp(&b.timestamp)
                );
                if let Ok(rate) = sample_rate_of(&rows) {
                    let _ = writeln!(out, "rate      {rate:.6} records/s");
                }
                let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
                let _ = writeln!(out, "value     {}", describe(&v));
            }
        }
        return Ok(out);
    }
    if ext != "json" {
        return Err(Error::Input(format!("{}: expected a .csv or .json file", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    if json.get("format").and_then(|v| v.as_str()) == Some(MODEL_FORMAT) {
        let htm = load_model(path)?;
        let s = htm.settings();
        let _ = writeln!(out, "model file {} (format version {MODEL_VERSION})", path.display());
        let _ = writeln!(out, "mode      {:?}", s.mode);
        let _ = writeln!(
            out,
            "encoder   n={} w={} range [{}, {}]",
            htm.encoder().n_bits,
            htm.encoder().w_active,
            htm.encoder().value_min,
            htm.encoder().value_max
        );
        let _ = writeln!(out, "columns   {} (k={})", s.sp.n_columns, s.sp.k);
        let _ = writeln!(out, "cells     {} per column", s.tm.cells_per_column);
        let _ = writeln!(out, "segments  {}", htm.memory().segment_count());
        let _ = writeln!(out, "synapses  {}", htm.memory().synapse_count());
        let _ = writeln!(out, "records   {}", htm.records_seen());
    } else if json.is_array() {
        let results = nab::read_results(path)?;
        let _ = writeln!(out, "results file {} with {} entries", path.display(), results.len());
        out.push_str(&nab::render_table(&results));
    } else if json.get("config_sha256").is_some() {
        let m = Manifest::read(path)?;
        let _ = writeln!(out, "manifest  {} {} ({})", m.tool, m.version, m.detector);
        let _ = writeln!(out, "config    sha256 {}", m.config_sha256);
        let _ = writeln!(out, "seed      {}", m.seed);
        for f in &m.files {
            let _ = writeln!(out, "  {:<24} {:>8} records  {:>8.3} s", f.name, f.records, f.runtime_s);
        }
        let _ = writeln!(out, "runtime   {:.3} s", m.runtime_s);
    } else {
        let labels = nab::read_labels(path)?;
        let total: usize = labels.values().map(Vec::len).sum();
        let _ = writeln!(out, "labels file {} with {} series and {total} labels", path.display(), labels.len());
        for (name, ls) in &labels {
            let _ = writeln!(out, "  {name:<24} {}", ls.len());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "htm-anomaly", version, about = "Streaming HTM anomaly detection and NAB-style benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a detector over a corpus and write per-record scores.
    Run(RunArgs),
    /// Score result directories against labels.
    Score(ScoreArgs),
    /// Generate a labelled corpus or map a source spectrum onto a target.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Summarize a series, scores, labels, results, manifest or model file.
    Inspect { path: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Configuration file.
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set detector=null`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Keep every k-th record.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Save each series' final HTM state as `<dir>/<file>.model.json`.
    #[arg(long, value_name = "DIR")]
    pub save_model: Option<PathBuf>,
    /// Start every series from this saved HTM state.
    #[arg(long, value_name = "FILE")]
    pub load_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Score directories written by `run`, one per detector.
    #[arg(long = "scores", required = true, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    #[arg(long)]
    pub labels: PathBuf,
    /// Comma-separated profiles.
    #[arg(long, default_value = "standard,low_fp,low_fn")]
    pub profiles: String,
    #[arg(long, default_value_t = nab::DEFAULT_WINDOW_BUDGET)]
    pub window_budget: f64,
    /// Where results, windows and table go (default: first scores directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Seeded degradation corpus with labels at growth breakpoints.
    Generate(GenerateArgs),
    /// Transplant the source's band-power changes onto the target.
    Map(MapArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub files: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub breakpoints: usize,
    /// Seconds per file.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub amplitude_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Output series path; labels go next to it as `labels.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Labels JSON containing the source file's labels.
    #[arg(long)]
    pub source_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub window_len: usize,
    #[arg(long)]
    pub hop: Option<usize>,
    /// Band width in Hz (default: one FFT bin).
    #[arg(long)]
    pub bin_size: Option<f64>,
    #[arg(long, default_value = "hann")]
    pub taper: String,
    #[arg(long, default_value_t = 10.0)]
    pub ratio_clamp: f64,
}

fn run_command(command: Command) -> Result<String> {
    match command {
        Command::Run(args) => {
            let path = args
                .config
                .ok_or_else(|| Error::Config(format!("no configuration: pass --config or set {CONFIG_ENV}")))?;
            let mut map = ConfigMap::read(&path).map_err(|e| match e {
                Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
                other => other,
            })?;
            for o in &args.overrides {
                map.set(o)?;
            }
            if let Some(k) = args.subsample {
                map.set(&format!("subsample={k}"))?;
            }
            let summary = cmd_run(&map, &RunOptions { save_model: args.save_model, load_model: args.load_model })?;
            let mut out = format!(
                "{} series scored by {} in {:.3} s\n",
                summary.outputs.len(),
                summary.manifest.detector,
                summary.manifest.runtime_s
            );
            if let Some(results) = &summary.results {
                out.push_str(&nab::render_table(results));
            }
            Ok(out)
        }
        Command::Score(args) => {
            let results = cmd_score(&ScoreOptions {
                scores_dirs: args.scores,
                labels_path: args.labels,
                profiles: parse_profiles(&args.profiles)?,
                window_budget: args.window_budget,
                out_dir: args.out,
            })?;
            Ok(nab::render_table(&results))
        }
        Command::Synth(SynthCommand::Generate(args)) => {
            let d = CorpusSpec::default();
            let spec = CorpusSpec {
                files: args.files,
                seed: args.seed,
                breakpoints: args.breakpoints,
                duration_s: args.duration.unwrap_or(d.duration_s),
                sample_rate: args.sample_rate.unwrap_or(d.sample_rate),
                amplitude_step: args.amplitude_step.unwrap_or(d.amplitude_step),
                ..d
            };
            let files = psd_synth::generate_corpus(&spec)?;
            let labels = write_corpus(&args.out, &files)?;
            Ok(format!(
                "wrote {} series and {} labels to {}\n",
                files.len(),
                labels.values().map(Vec::len).sum::<usize>(),
                args.out.display()
            ))
        }
        Command::Synth(SynthCommand::Map(args)) => {
            let rate = sample_rate_of(&series::read_series(&args.target)?)?;
            let spec = SynthSpec {
                window_len: args.window_len,
                hop: args.hop.unwrap_or(args.window_len / 2),
                bin_size: args.bin_size.unwrap_or(rate / args.window_len as f64),
                sample_rate: rate,
                taper: args.taper.parse::<Taper>()?,
                ratio_clamp: args.ratio_clamp,
                power_floor: 1e-12,
            };
            let source_labels = match &args.source_labels {
                Some(p) => {
                    let all = nab::read_labels(p)?;
                    all.get(&file_name(&args.source)).cloned()
                }
                None => None,
            };
            let labels = synth_map(&args.source, &args.target, &args.out, &spec, source_labels.as_deref())?;
            let label_path = args.out.with_file_name(LABELS_FILE);
            let map: Labels = [(file_name(&args.out), labels)].into();
            nab::write_labels(&label_path, &map)?;
            Ok(format!("wrote {} and {}\n", args.out.display(), label_path.display()))
        }
        Command::Inspect { path } => cmd_inspect(&path),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
