//! NAB-style benchmark scoring.
//!
//! Labels become windows, each detector's score stream is thresholded, and
//! the first detection inside a window earns a reward that decays towards
//! the window's right edge. Detections outside windows are penalised, missed
//! windows cost `a_fn`. Thresholds are optimised per profile over a whole
//! corpus, and raw scores are normalised so the constant-0.5 detector maps
//! to 0 and a perfect detector to 100.
//!
//! Window arithmetic is done in record positions: a window covering records
//! `s..=e` places record `j` at `y = (j - e) / (e - s)`.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::detectors::DetectorOutput;
use crate::error::{Error, Result};
use crate::series::{format_timestamp, parse_timestamp};

pub const DEFAULT_WINDOW_BUDGET: f64 = 0.10;

/// Margin by which a later (lower) threshold must win the sweep.
const SWEEP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub source_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringProfile {
    pub name: String,
    pub a_tp: f64,
    pub a_fp: f64,
    pub a_tn: f64,
    pub a_fn: f64,
}

impl ScoringProfile {
    pub fn standard() -> Self {
        ScoringProfile { name: "standard".into(), a_tp: 1.0, a_fp: -0.11, a_tn: 0.0, a_fn: -1.0 }
    }

    pub fn low_fp() -> Self {
        ScoringProfile { name: "low_fp".into(), a_fp: -0.22, ..Self::standard() }
    }

    pub fn low_fn() -> Self {
        ScoringProfile { name: "low_fn".into(), a_fn: -2.0, ..Self::standard() }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "standard" => Ok(Self::standard()),
            "low_fp" => Ok(Self::low_fp()),
            "low_fn" => Ok(Self::low_fn()),
            other => Err(Error::Config(format!("unknown profile `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_tp > 0.0) || !(self.a_fp <= 0.0) || !(self.a_fn <= 0.0) || !self.a_tn.is_finite() {
            return Err(Error::Config(format!("profile `{}` needs a_tp > 0 and a_fp, a_fn <= 0", self.name)));
        }
        Ok(())
    }
}

/// `2 / (1 + e^{5y}) - 1`, saturated at -1 beyond `y = 3`.
pub fn scaled_sigmoid(y: f64) -> f64 {
    if y > 3.0 { -1.0 } else { 2.0 / (1.0 + (5.0 * y).exp()) - 1.0 }
}

/// Weighted score of a detection at relative position `y`: rewards scale
/// with `a_tp` inside windows, penalties with `|a_fp|` after them.
pub fn sigma(y: f64, profile: &ScoringProfile) -> f64 {
    let s = scaled_sigmoid(y);
    if s >= 0.0 { profile.a_tp * s } else { -profile.a_fp * s }
}

/// One centred window per label, each `budget * records / labels` records
/// long, merged where they overlap and clipped to the file.
pub fn make_windows(
    labels: &[DateTime<Utc>],
    timestamps: &[DateTime<Utc>],
    budget: f64,
    source_file: &str,
) -> Result<Vec<AnomalyWindow>> {
    if !(budget > 0.0 && budget < 1.0) {
        return Err(Error::Domain(format!("window budget {budget} outside (0, 1)")));
    }
    if labels.is_empty() {
        return Ok(Vec::new());
    }
    let (first, last) = match (timestamps.first(), timestamps.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::Input(format!("{source_file}: labels given for an empty series"))),
    };
    let n = timestamps.len();
    let len = ((budget * n as f64 / labels.len() as f64).floor() as usize).max(1);
    let mut sorted = labels.to_vec();
    sorted.sort();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for label in sorted {
        if label < first || label > last {
            return Err(Error::Input(format!(
                "{source_file}: label {} outside the series span",
                format_timestamp(&label)
            )));
        }
        let i = timestamps.partition_point(|t| *t < label);
        let s = i.saturating_sub(len / 2);
        let e = (s + len - 1).min(n - 1);
        match spans.last_mut() {
            Some(prev) if s <= prev.1 => prev.1 = prev.1.max(e),
            _ => spans.push((s, e)),
        }
    }
    Ok(spans
        .into_iter()
        .map(|(s, e)| AnomalyWindow { start: timestamps[s], end: timestamps[e], source_file: source_file.to_string() })
        .collect())
}

/// Windows resolved to inclusive record ranges of one file.
struct Layout {
    ranges: Vec<(usize, usize)>,
    windows: usize,
}

impl Layout {
    fn new(timestamps: &[DateTime<Utc>], windows: &[AnomalyWindow]) -> Self {
        let mut ranges: Vec<(usize, usize)> = windows
            .iter()
            .filter_map(|w| {
                let s = timestamps.partition_point(|t| *t < w.start);
                let e = timestamps.partition_point(|t| *t <= w.end);
                (e > s).then(|| (s, e - 1))
            })
            .collect();
        ranges.sort();
        Layout { ranges, windows: windows.len() }
    }

    /// Window containing record `j`, or the last window ending before it.
    fn locate(&self, j: usize) -> Slot {
        let k = self.ranges.partition_point(|&(s, _)| s <= j);
        if k == 0 {
            return Slot::Before;
        }
        let (s, e) = self.ranges[k - 1];
        if j <= e { Slot::In(k - 1, position(j, s, e)) } else { Slot::After(position(j, s, e)) }
    }
}

enum Slot {
    In(usize, f64),
    After(f64),
    Before,
}

fn position(j: usize, s: usize, e: usize) -> f64 {
    if e == s {
        // A one-record window: its only record is its left edge.
        return if j == e { -1.0 } else { (j - e) as f64 };
    }
    (j as f64 - e as f64) / (e - s) as f64
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Domain(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(())
}

fn check_scores(output: &DetectorOutput) -> Result<()> {
    if output.timestamps.len() != output.scores.len() {
        return Err(Error::Dimension { expected: output.timestamps.len(), actual: output.scores.len() });
    }
    match output.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        Some(s) => Err(Error::Evaluation(format!("score {s} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Raw score of one file at a fixed threshold.
pub fn score_run(
    output: &DetectorOutput,
    windows: &[AnomalyWindow],
    threshold: f64,
    profile: &ScoringProfile,
) -> Result<f64> {
    check_threshold(threshold)?;
    check_scores(output)?;
    let layout = Layout::new(&output.timestamps, windows);
    let mut hit = vec![false; layout.ranges.len()];
    let mut total = 0.0;
    for (j, _) in output.scores.iter().enumerate().filter(|(_, &s)| s >= threshold) {
        match layout.locate(j) {
            Slot::In(w, y) => {
                if !hit[w] {
                    hit[w] = true;
                    total += sigma(y, profile);
                }
            }
            Slot::After(y) => total += sigma(y, profile),
            Slot::Before => total += profile.a_fp,
        }
    }
    let missed = layout.windows - hit.iter().filter(|&&h| h).count();
    Ok(total + missed as f64 * profile.a_fn)
}

/// Score of a detector that fires exactly on each window's first record.
pub fn perfect_raw(runs: &[(&DetectorOutput, &[AnomalyWindow])], profile: &ScoringProfile) -> f64 {
    runs.iter()
        .map(|(out, windows)| {
            let layout = Layout::new(&out.timestamps, windows);
            let missed = layout.windows - layout.ranges.len();
            layout.ranges.len() as f64 * sigma(-1.0, profile) + missed as f64 * profile.a_fn
        })
        .sum()
}

/// Threshold maximising the summed raw score over `runs`, with that score.
/// Candidates are every distinct score plus 0 and 1; ties keep the highest.
pub fn optimize_threshold(
    runs: &[(&DetectorOutput, &[AnomalyWindow])],
    profile: &ScoringProfile,
) -> Result<(f64, f64)> {
    if runs.is_empty() {
        return Err(Error::Evaluation("empty corpus".into()));
    }
    profile.validate()?;
    let layouts: Vec<Layout> = runs
        .iter()
        .map(|(out, windows)| {
            check_scores(out)?;
            Ok(Layout::new(&out.timestamps, windows))
        })
        .collect::<Result<_>>()?;

    // (score, file, record), highest score first.
    let mut order: Vec<(f64, usize, usize)> = runs
        .iter()
        .enumerate()
        .flat_map(|(f, (out, _))| out.scores.iter().enumerate().map(move |(j, &s)| (s, f, j)))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut candidates: Vec<f64> = order.iter().map(|o| o.0).chain([0.0, 1.0]).collect();
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();

    // Per window: contribution so far (starts as a miss) and earliest hit.
    let mut contrib: Vec<Vec<f64>> = layouts.iter().map(|l| vec![profile.a_fn; l.ranges.len()]).collect();
    let mut earliest: Vec<Vec<usize>> = layouts.iter().map(|l| vec![usize::MAX; l.ranges.len()]).collect();
    let mut total = layouts.iter().map(|l| l.windows).sum::<usize>() as f64 * profile.a_fn;

    let mut best: Option<(f64, f64)> = None;
    let mut next = 0;
    for &c in &candidates {
        while next < order.len() && order[next].0 >= c {
            let (_, f, j) = order[next];
            match layouts[f].locate(j) {
                Slot::In(w, y) => {
                    if j < earliest[f][w] {
                        earliest[f][w] = j;
                        let v = sigma(y, profile);
                        total += v - contrib[f][w];
                        contrib[f][w] = v;
                    }
                }
                Slot::After(y) => total += sigma(y, profile),
                Slot::Before => total += profile.a_fp,
            }
            next += 1;
        }
        if best.is_none_or(|(_, b)| total > b + SWEEP_EPS) {
            best = Some((c, total));
        }
    }
    // Re-sum at the winning threshold so the reported score does not carry
    // the sweep's accumulated rounding.
    let (threshold, _) = best.unwrap_or((1.0, total));
    let raw = runs.iter().map(|(out, windows)| score_run(out, windows, threshold, profile)).sum::<Result<f64>>()?;
    Ok((threshold, raw))
}

pub fn normalize(raw: f64, null_raw: f64, perfect_raw: f64) -> Result<f64> {
    if !(perfect_raw > null_raw) {
        return Err(Error::Evaluation(format!("perfect score {perfect_raw} does not exceed null score {null_raw}")));
    }
    Ok((100.0 * (raw - null_raw) / (perfect_raw - null_raw)).clamp(0.0, 100.0))
}

/// Optimised score of the constant-0.5 detector on the same records.
pub fn null_raw(runs: &[(&DetectorOutput, &[AnomalyWindow])], profile: &ScoringProfile) -> Result<f64> {
    let nulls: Vec<DetectorOutput> = runs
        .iter()
        .map(|(out, _)| DetectorOutput {
            timestamps: out.timestamps.clone(),
            values: out.values.clone(),
            scores: vec![0.5; out.scores.len()],
            train_len: 0,
        })
        .collect();
    let null_runs: Vec<(&DetectorOutput, &[AnomalyWindow])> =
        nulls.iter().zip(runs).map(|(n, (_, w))| (n, *w)).collect();
    Ok(optimize_threshold(&null_runs, profile)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub detector: String,
    pub profile: String,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub optimized_threshold: f64,
    pub null_raw: f64,
    pub perfect_raw: f64,
    /// Wall-clock seconds the detector spent on the corpus, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
}

/// Optimises, scores and normalises one detector under one profile.
pub fn evaluate(
    detector: &str,
    runs: &[(&DetectorOutput, &[AnomalyWindow])],
    profile: &ScoringProfile,
) -> Result<BenchmarkResult> {
    let (threshold, raw) = optimize_threshold(runs, profile)?;
    let null = null_raw(runs, profile)?;
    let perfect = perfect_raw(runs, profile);
    Ok(BenchmarkResult {
        detector: detector.to_string(),
        profile: profile.name.clone(),
        raw_score: raw,
        normalized_score: normalize(raw, null, perfect)?,
        optimized_threshold: threshold,
        null_raw: null,
        perfect_raw: perfect,
        runtime_s: None,
    })
}

/// Table with one row per detector and one column per profile.
pub fn render_table(results: &[BenchmarkResult]) -> String {
    let mut profiles: Vec<&str> = Vec::new();
    let mut rows: BTreeMap<&str, (BTreeMap<&str, f64>, Option<f64>)> = BTreeMap::new();
    for r in results {
        if !profiles.contains(&r.profile.as_str()) {
            profiles.push(&r.profile);
        }
        let row = rows.entry(&r.detector).or_default();
        row.0.insert(&r.profile, r.normalized_score);
        row.1 = row.1.or(r.runtime_s);
    }
    let width = rows.keys().map(|d| d.len()).max().unwrap_or(0).max("Detector".len());
    let mut out = format!("{:<width$}", "Detector");
    for p in &profiles {
        out.push_str(&format!("  {p:>10}"));
    }
    out.push_str(&format!("  {:>11}\n", "Runtime (s)"));
    let mut ordered: Vec<_> = rows.into_iter().collect();
    let first = profiles.first().copied().unwrap_or_default();
    ordered.sort_by(|a, b| {
        let ka = a.1.0.get(first).copied().unwrap_or(f64::MIN);
        let kb = b.1.0.get(first).copied().unwrap_or(f64::MIN);
        kb.total_cmp(&ka).then(a.0.cmp(b.0))
    });
    for (detector, (scores, runtime)) in ordered {
        out.push_str(&format!("{detector:<width$}"));
        for p in &profiles {
            match scores.get(p) {
                Some(s) => out.push_str(&format!("  {s:>10.2}")),
                None => out.push_str(&format!("  {:>10}", "-")),
            }
        }
        match runtime {
            Some(t) => out.push_str(&format!("  {t:>11.2}\n")),
            None => out.push_str(&format!("  {:>11}\n", "-")),
        }
    }
    out
}

/// Per-file anomaly instants.
pub type Labels = BTreeMap<String, Vec<DateTime<Utc>>>;

/// Per-file windows.
pub type Windows = BTreeMap<String, Vec<AnomalyWindow>>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text =
        serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn instant(path: &Path, text: &str) -> Result<DateTime<Utc>> {
    parse_timestamp(text).ok_or_else(|| Error::Input(format!("{}: invalid timestamp `{text}`", path.display())))
}

pub fn read_labels(path: &Path) -> Result<Labels> {
    let raw: BTreeMap<String, Vec<String>> = read_json(path)?;
    raw.into_iter()
        .map(|(file, stamps)| {
            let parsed = stamps.iter().map(|s| instant(path, s)).collect::<Result<Vec<_>>>()?;
            Ok((file, parsed))
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &Labels) -> Result<()> {
    let raw: BTreeMap<&String, Vec<String>> =
        labels.iter().map(|(f, ts)| (f, ts.iter().map(format_timestamp).collect())).collect();
    write_json(path, &raw)
}

pub fn write_windows(path: &Path, windows: &Windows) -> Result<()> {
    let raw: BTreeMap<&String, Vec<[String; 2]>> = windows
        .iter()
        .map(|(f, ws)| (f, ws.iter().map(|w| [format_timestamp(&w.start), format_timestamp(&w.end)]).collect()))
        .collect();
    write_json(path, &raw)
}

pub fn read_windows(path: &Path) -> Result<Windows> {
    let raw: BTreeMap<String, Vec<[String; 2]>> = read_json(path)?;
    raw.into_iter()
        .map(|(file, pairs)| {
            let ws = pairs
                .iter()
                .map(|[s, e]| {
                    Ok(AnomalyWindow { start: instant(path, s)?, end: instant(path, e)?, source_file: file.clone() })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((file, ws))
        })
        .collect()
}

pub fn write_results(path: &Path, results: &[BenchmarkResult]) -> Result<()> {
    write_json(path, &results)
}

pub fn read_results(path: &Path) -> Result<Vec<BenchmarkResult>> {
    read_json(path)
}
