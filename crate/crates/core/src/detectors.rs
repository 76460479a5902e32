//! Streaming detectors behind one contract: one score in [0, 1] per record,
//! in input order, with the model updated after every record.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anomaly::{self, AnomalyMode, AnomalyRecord, LikelihoodConfig, LikelihoodState};
use crate::encoder::{self, ScalarEncoderConfig};
use crate::error::{Error, Result};
use crate::series::Record;
use crate::spatial_pooler::{SpatialPooler, SpatialPoolerConfig};
use crate::temporal_memory::{TemporalMemory, TemporalMemoryConfig};

/// Fraction of each file used for training when not configured otherwise.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.15;

/// Likelihood at or above which an HTM record is flagged by default.
pub const DEFAULT_FLAG_THRESHOLD: f64 = 0.5497;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    HtmHd,
    HtmRaw,
    WindowedGaussian,
    Threshold,
    Random,
    Null,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::HtmHd,
        DetectorKind::HtmRaw,
        DetectorKind::WindowedGaussian,
        DetectorKind::Threshold,
        DetectorKind::Random,
        DetectorKind::Null,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::HtmHd => "htm_hd",
            DetectorKind::HtmRaw => "htm_raw",
            DetectorKind::WindowedGaussian => "windowed_gaussian",
            DetectorKind::Threshold => "threshold",
            DetectorKind::Random => "random",
            DetectorKind::Null => "null",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown detector kind `{s}`")))
    }
}

/// Detector selection plus kind-specific parameters as text key/values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        DetectorConfig { kind, params: BTreeMap::new(), seed: 0 }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Typed access to a parameter map; anything left unread is rejected.
struct Params<'a> {
    map: &'a BTreeMap<String, String>,
    used: BTreeSet<&'a str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a BTreeMap<String, String>) -> Self {
        Params { map, used: BTreeSet::new() }
    }

    fn get<T: FromStr>(&mut self, key: &'static str) -> Result<Option<T>> {
        match self.map.get_key_value(key) {
            None => Ok(None),
            Some((k, v)) => {
                self.used.insert(k.as_str());
                v.trim().parse().map(Some).map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
            }
        }
    }

    fn or<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn finish(self) -> Result<()> {
        let unknown: Vec<&str> = self.map.keys().map(String::as_str).filter(|k| !self.used.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown parameter(s): {}", unknown.join(", "))))
        }
    }
}

/// Settings of the HTM pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HtmSettings {
    pub n_bits: usize,
    pub w_active: usize,
    /// Explicit encoder range; calibrated from training data when `None`.
    pub value_range: Option<(f64, f64)>,
    pub sp: SpatialPoolerConfig,
    pub tm: TemporalMemoryConfig,
    pub likelihood: LikelihoodConfig,
    pub mode: AnomalyMode,
    pub flag_threshold: f64,
    /// Keep training-phase raw scores in the likelihood history.
    pub include_training_history: bool,
    pub seed: u64,
}

impl Default for HtmSettings {
    fn default() -> Self {
        HtmSettings {
            n_bits: encoder::DEFAULT_N_BITS,
            w_active: encoder::DEFAULT_W_ACTIVE,
            value_range: None,
            sp: SpatialPoolerConfig::default(),
            tm: TemporalMemoryConfig::default(),
            likelihood: LikelihoodConfig::default(),
            mode: AnomalyMode::Likelihood,
            flag_threshold: DEFAULT_FLAG_THRESHOLD,
            include_training_history: true,
            seed: 0,
        }
    }
}

impl HtmSettings {
    fn from_params(p: &mut Params<'_>, mode: AnomalyMode, seed: u64) -> Result<Self> {
        let d = HtmSettings::default();
        let sp = SpatialPoolerConfig {
            n_columns: p.or("sp.n_columns", d.sp.n_columns)?,
            k: p.or("sp.k", d.sp.k)?,
            connect_threshold: p.or("sp.connect_threshold", d.sp.connect_threshold)?,
            potential_fraction: p.or("sp.potential_fraction", d.sp.potential_fraction)?,
            inc: p.or("sp.inc", d.sp.inc)?,
            dec: p.or("sp.dec", d.sp.dec)?,
            boosting: p.or("sp.boosting", d.sp.boosting)?,
        };
        let tm = TemporalMemoryConfig {
            cells_per_column: p.or("tm.cells_per_column", d.tm.cells_per_column)?,
            activation_threshold: p.or("tm.activation_threshold", d.tm.activation_threshold)?,
            learning_threshold: p.or("tm.learning_threshold", d.tm.learning_threshold)?,
            connect_threshold: p.or("tm.connect_threshold", d.tm.connect_threshold)?,
            initial_permanence: p.or("tm.initial_permanence", d.tm.initial_permanence)?,
            rates: crate::temporal_memory::LearningRates {
                inc: p.or("tm.inc", d.tm.rates.inc)?,
                dec: p.or("tm.dec", d.tm.rates.dec)?,
                punish: p.or("tm.punish", d.tm.rates.punish)?,
            },
            max_segments_per_cell: p.or("tm.max_segments_per_cell", d.tm.max_segments_per_cell)?,
            max_synapses_per_segment: p.or("tm.max_synapses_per_segment", d.tm.max_synapses_per_segment)?,
            sample_size: p.or("tm.sample_size", d.tm.sample_size)?,
            growth: p.or("tm.growth", d.tm.growth)?,
            seed: seed.wrapping_add(1),
        };
        let likelihood = LikelihoodConfig {
            history_capacity: p.or("likelihood.history", d.likelihood.history_capacity)?,
            short_window: p.or("likelihood.short_window", d.likelihood.short_window)?,
            epsilon_sigma: p.or("likelihood.epsilon_sigma", d.likelihood.epsilon_sigma)?,
        };
        let lo: Option<f64> = p.get("encoder.value_min")?;
        let hi: Option<f64> = p.get("encoder.value_max")?;
        let value_range = match (lo, hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err(Error::Config("encoder.value_min and encoder.value_max must be set together".into())),
        };
        Ok(HtmSettings {
            n_bits: p.or("encoder.n_bits", d.n_bits)?,
            w_active: p.or("encoder.w_active", d.w_active)?,
            value_range,
            sp,
            tm,
            likelihood,
            mode,
            flag_threshold: p.or("flag_threshold", d.flag_threshold)?,
            include_training_history: p.or("likelihood.include_training", d.include_training_history)?,
            seed,
        })
    }
}

/// Encoder, spatial pooler, temporal memory and likelihood for one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HtmDetector {
    settings: HtmSettings,
    encoder: ScalarEncoderConfig,
    pooler: SpatialPooler,
    memory: TemporalMemory,
    likelihood: LikelihoodState,
    records_seen: u64,
}

impl HtmDetector {
    /// Builds the pipeline; `calibration` sets the encoder range unless the
    /// settings pin it.
    pub fn new(settings: HtmSettings, calibration: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&settings.flag_threshold) {
            return Err(Error::Config(format!("flag_threshold {} outside [0, 1]", settings.flag_threshold)));
        }
        let encoder = match settings.value_range {
            Some((lo, hi)) => ScalarEncoderConfig::new(settings.n_bits, settings.w_active, lo, hi)?,
            None => ScalarEncoderConfig::calibrated(settings.n_bits, settings.w_active, calibration)?,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let pooler = SpatialPooler::new(encoder.n_bits, settings.sp.clone(), &mut rng)?;
        let memory = TemporalMemory::new(settings.sp.n_columns, settings.tm.clone())?;
        let likelihood = LikelihoodState::new(settings.likelihood)?;
        Ok(HtmDetector { settings, encoder, pooler, memory, likelihood, records_seen: 0 })
    }

    pub fn settings(&self) -> &HtmSettings {
        &self.settings
    }

    pub fn encoder(&self) -> &ScalarEncoderConfig {
        &self.encoder
    }

    pub fn pooler(&self) -> &SpatialPooler {
        &self.pooler
    }

    pub fn memory(&self) -> &TemporalMemory {
        &self.memory
    }

    pub fn records_seen(&self) -> u64 {
        self.records_seen
    }

    /// Runs one record through the full cycle and reports both scores.
    pub fn process(&mut self, timestamp: DateTime<Utc>, value: f64) -> Result<AnomalyRecord> {
        let x = encoder::encode(value, &self.encoder)?;
        let cols = self.pooler.compute(&x, true)?;
        self.memory.activate(&cols)?;
        let raw =
            anomaly::raw_anomaly_score(self.memory.previous_predictive_cells(), self.memory.active_cells(), &cols)?;
        self.memory.learn()?;
        self.memory.predict();
        let likelihood = self.likelihood.update(raw)?;
        self.records_seen += 1;
        let score = self.score_of(raw, likelihood);
        Ok(AnomalyRecord {
            timestamp,
            value,
            raw_score: raw,
            likelihood,
            flagged: score >= self.settings.flag_threshold,
        })
    }

    fn score_of(&self, raw: f64, likelihood: f64) -> f64 {
        match self.settings.mode {
            AnomalyMode::Likelihood => likelihood,
            AnomalyMode::Raw => raw,
        }
    }

    fn begin_test(&mut self) -> Result<()> {
        if !self.settings.include_training_history {
            self.likelihood = LikelihoodState::new(self.settings.likelihood)?;
        }
        Ok(())
    }

    /// Clears sequence context; learned connections are kept.
    pub fn reset_sequence(&mut self) {
        self.memory.reset();
    }
}

/// Tail-probability detector over a sliding window of past values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedGaussian {
    window: usize,
    values: VecDeque<f64>,
    sum: f64,
    sum_sq: f64,
    since_refresh: usize,
}

impl WindowedGaussian {
    pub fn new(window: usize) -> Result<Self> {
        if window < 2 {
            return Err(Error::Config("window must hold at least 2 values".into()));
        }
        Ok(WindowedGaussian {
            window,
            values: VecDeque::with_capacity(window),
            sum: 0.0,
            sum_sq: 0.0,
            since_refresh: 0,
        })
    }

    /// Scores `value` against the current window, then admits it.
    pub fn step(&mut self, value: f64) -> f64 {
        let score = self.score(value);
        if self.values.len() == self.window {
            let old = self.values.pop_front().unwrap_or_default();
            self.sum -= old;
            self.sum_sq -= old * old;
        }
        self.values.push_back(value);
        self.sum += value;
        self.sum_sq += value * value;
        self.since_refresh += 1;
        if self.since_refresh >= self.window {
            // Re-sum periodically to stop rounding drift in the running totals.
            self.sum = self.values.iter().sum();
            self.sum_sq = self.values.iter().map(|v| v * v).sum();
            self.since_refresh = 0;
        }
        score
    }

    fn score(&self, value: f64) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.sum / n as f64;
        let var = (self.sum_sq / n as f64 - mean * mean).max(0.0);
        let sd = var.sqrt();
        let dev = (value - mean).abs();
        if sd <= 1e-12 * mean.abs().max(1.0) {
            return if dev <= 1e-12 * mean.abs().max(1.0) { 0.0 } else { 1.0 };
        }
        // Two-sided: P(|Z| < |z|) = 1 - 2 Q(|z|).
        (1.0 - 2.0 * anomaly::gaussian_tail(dev / sd)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdFeature {
    /// Absolute instantaneous amplitude.
    Abs,
    /// Root mean square over a trailing window.
    Rms { window: usize },
}

/// Fires when the feature reaches a fixed level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDetector {
    level: f64,
    feature: ThresholdFeature,
    recent: VecDeque<f64>,
}

impl ThresholdDetector {
    pub fn new(level: f64, feature: ThresholdFeature) -> Result<Self> {
        if !level.is_finite() {
            return Err(Error::Config(format!("threshold level {level} is not finite")));
        }
        if let ThresholdFeature::Rms { window: 0 } = feature {
            return Err(Error::Config("rms window must be positive".into()));
        }
        Ok(ThresholdDetector { level, feature, recent: VecDeque::new() })
    }

    /// Level = mean + `k_sigma` standard deviations of the feature over
    /// `calibration` (raw values for the absolute-amplitude feature).
    pub fn calibrated(calibration: &[f64], k_sigma: f64, feature: ThresholdFeature) -> Result<Self> {
        let series: Vec<f64> = match feature {
            ThresholdFeature::Abs => calibration.to_vec(),
            ThresholdFeature::Rms { .. } => {
                let mut probe = ThresholdDetector::new(0.0, feature)?;
                calibration.iter().map(|&v| probe.feature_value(v)).collect()
            }
        };
        if series.is_empty() {
            return Err(Error::Input("threshold calibration needs at least one value".into()));
        }
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        let sd = (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        Self::new(mean + k_sigma * sd, feature)
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    fn feature_value(&mut self, value: f64) -> f64 {
        match self.feature {
            ThresholdFeature::Abs => value.abs(),
            ThresholdFeature::Rms { window } => {
                if self.recent.len() == window {
                    self.recent.pop_front();
                }
                self.recent.push_back(value);
                (self.recent.iter().map(|v| v * v).sum::<f64>() / self.recent.len() as f64).sqrt()
            }
        }
    }

    pub fn step(&mut self, value: f64) -> f64 {
        if self.feature_value(value) >= self.level { 1.0 } else { 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Model {
    Htm(Box<HtmDetector>),
    WindowedGaussian(WindowedGaussian),
    Threshold(ThresholdDetector),
    Random(ChaCha8Rng),
    Null,
}

/// A configured detector instance for one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    kind: DetectorKind,
    model: Model,
    last_timestamp: Option<DateTime<Utc>>,
}

impl Detector {
    /// Builds a fresh detector. `calibration` is the training prefix, used by
    /// detectors that size themselves from data.
    pub fn new(cfg: &DetectorConfig, calibration: &[f64]) -> Result<Self> {
        let mut p = Params::new(&cfg.params);
        let model = match cfg.kind {
            DetectorKind::HtmHd | DetectorKind::HtmRaw => {
                let mode = if cfg.kind == DetectorKind::HtmHd { AnomalyMode::Likelihood } else { AnomalyMode::Raw };
                let settings = HtmSettings::from_params(&mut p, mode, cfg.seed)?;
                Model::Htm(Box::new(HtmDetector::new(settings, calibration)?))
            }
            DetectorKind::WindowedGaussian => {
                Model::WindowedGaussian(WindowedGaussian::new(p.or("window", 6000usize)?)?)
            }
            DetectorKind::Threshold => {
                let feature = match p.or("feature", "abs".to_string())?.as_str() {
                    "abs" => ThresholdFeature::Abs,
                    "rms" => ThresholdFeature::Rms { window: p.or("rms_window", 10usize)? },
                    other => return Err(Error::Config(format!("unknown threshold feature `{other}`"))),
                };
                let k_sigma: f64 = p.or("k_sigma", 4.0)?;
                match p.get::<f64>("level")? {
                    Some(level) => Model::Threshold(ThresholdDetector::new(level, feature)?),
                    None => Model::Threshold(ThresholdDetector::calibrated(calibration, k_sigma, feature)?),
                }
            }
            DetectorKind::Random => Model::Random(ChaCha8Rng::seed_from_u64(cfg.seed)),
            DetectorKind::Null => Model::Null,
        };
        p.finish()?;
        Ok(Detector { kind: cfg.kind, model, last_timestamp: None })
    }

    /// Wraps an existing HTM pipeline, e.g. one restored from a model file.
    pub fn from_htm(htm: HtmDetector) -> Self {
        let kind = match htm.settings.mode {
            AnomalyMode::Likelihood => DetectorKind::HtmHd,
            AnomalyMode::Raw => DetectorKind::HtmRaw,
        };
        Detector { kind, model: Model::Htm(Box::new(htm)), last_timestamp: None }
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn htm(&self) -> Option<&HtmDetector> {
        match &self.model {
            Model::Htm(h) => Some(h),
            _ => None,
        }
    }

    pub fn into_htm(self) -> Option<HtmDetector> {
        match self.model {
            Model::Htm(h) => Some(*h),
            _ => None,
        }
    }

    /// Scores one record and updates the model.
    pub fn step(&mut self, record: &Record) -> Result<f64> {
        if let Some(prev) = self.last_timestamp {
            if record.timestamp < prev {
                return Err(Error::Stream(format!("record at {} arrives after {}", record.timestamp, prev)));
            }
        }
        if !record.value.is_finite() {
            return Err(Error::Input(format!("non-finite value {}", record.value)));
        }
        self.last_timestamp = Some(record.timestamp);
        let score = match &mut self.model {
            Model::Htm(h) => {
                let r = h.process(record.timestamp, record.value)?;
                h.score_of(r.raw_score, r.likelihood)
            }
            Model::WindowedGaussian(w) => w.step(record.value),
            Model::Threshold(t) => t.step(record.value),
            Model::Random(rng) => rng.random::<f64>(),
            Model::Null => 0.5,
        };
        Ok(score)
    }

    /// Marks the end of the training prefix.
    pub fn begin_test(&mut self) -> Result<()> {
        if let Model::Htm(h) = &mut self.model {
            h.begin_test()?;
        }
        Ok(())
    }
}

/// Scores of one file, aligned with its records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorOutput {
    pub timestamps: Vec<DateTime<Utc>>,
    pub values: Vec<f64>,
    pub scores: Vec<f64>,
    /// Leading records that belong to the training prefix (scored 0).
    pub train_len: usize,
}

impl DetectorOutput {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Number of leading records in the training prefix.
pub fn train_len(records: usize, train_fraction: f64) -> usize {
    (((records as f64) * train_fraction + 1e-9).floor() as usize).min(records)
}

/// Runs a fresh detector over one series. The training prefix is streamed
/// through the model but its scores are reported as 0.
pub fn run_file(cfg: &DetectorConfig, series: &[Record], train_fraction: f64) -> Result<DetectorOutput> {
    run_with(cfg, series, train_fraction, |_| Ok(())).map(|(out, _)| out)
}

/// As [`run_file`], also handing back the final detector state.
pub fn run_with(
    cfg: &DetectorConfig,
    series: &[Record],
    train_fraction: f64,
    mut on_detector: impl FnMut(&mut Detector) -> Result<()>,
) -> Result<(DetectorOutput, Detector)> {
    if series.is_empty() {
        return Err(Error::Input("empty series".into()));
    }
    if !(0.0..1.0).contains(&train_fraction) {
        return Err(Error::Config(format!("train_fraction must be in [0, 1), got {train_fraction}")));
    }
    let n_train = train_len(series.len(), train_fraction);
    let values: Vec<f64> = series.iter().map(|r| r.value).collect();
    let calibration = if n_train > 0 { &values[..n_train] } else { &values[..1] };
    let mut detector = Detector::new(cfg, calibration)?;
    on_detector(&mut detector)?;
    let out = stream(&mut detector, series, n_train)?;
    Ok((out, detector))
}

/// Streams `series` through an existing detector.
pub fn stream(detector: &mut Detector, series: &[Record], n_train: usize) -> Result<DetectorOutput> {
    let mut scores = Vec::with_capacity(series.len());
    for (i, rec) in series.iter().enumerate() {
        if i == n_train {
            detector.begin_test()?;
        }
        let s = detector.step(rec)?;
        scores.push(if i < n_train { 0.0 } else { s });
    }
    Ok(DetectorOutput {
        timestamps: series.iter().map(|r| r.timestamp).collect(),
        values: series.iter().map(|r| r.value).collect(),
        scores,
        train_len: n_train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn series(values: &[f64]) -> Vec<Record> {
        let t0 = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        values
            .iter()
            .enumerate()
            .map(|(i, &value)| Record { timestamp: t0 + chrono::Duration::seconds(i as i64), value })
            .collect()
    }

    fn small_htm() -> DetectorConfig {
        DetectorConfig::new(DetectorKind::HtmHd)
            .with_param("sp.n_columns", 256)
            .with_param("sp.k", 8)
            .with_param("tm.cells_per_column", 4)
            .with_param("tm.activation_threshold", 3)
            .with_param("tm.learning_threshold", 3)
            .with_param("tm.sample_size", 6)
    }

    #[test]
    fn null_is_constant() {
        let out = run_file(&DetectorConfig::new(DetectorKind::Null), &series(&[1.0; 5]), 0.0).unwrap();
        assert_eq!(out.scores, vec![0.5; 5]);
    }

    #[test]
    fn threshold_definition() {
        let cfg = DetectorConfig::new(DetectorKind::Threshold).with_param("level", 2.0);
        let out = run_file(&cfg, &series(&[1.0, 2.5]), 0.0).unwrap();
        assert_eq!(out.scores, vec![0.0, 1.0]);
    }

    #[test]
    fn threshold_calibrates_from_training() {
        // Training values: mean 0, population sd 1, so the level is 4.
        let t = ThresholdDetector::calibrated(&[1.0, -1.0, 1.0, -1.0], 4.0, ThresholdFeature::Abs).unwrap();
        assert!((t.level() - 4.0).abs() < 1e-12);
        let mut rms = ThresholdDetector::new(2.0, ThresholdFeature::Rms { window: 2 }).unwrap();
        assert_eq!(rms.step(1.0), 0.0);
        assert_eq!(rms.step(3.0), 1.0);
    }

    #[test]
    fn windowed_gaussian_extreme_tail() {
        let mut wg = WindowedGaussian::new(6000).unwrap();
        for _ in 0..99 {
            wg.step(0.0);
        }
        assert!(wg.step(10.0) > 0.999_999);
        // Against mean ~0.1, sd ~0.995: 10 is ~9.95 sigma away.
        assert!(wg.step(10.0) > 0.999_999);
        assert!(wg.step(0.1) < 0.1);
    }

    #[test]
    fn windowed_gaussian_window_slides() {
        let mut wg = WindowedGaussian::new(3).unwrap();
        for v in [5.0, 5.0, 5.0, 1.0, 1.0, 1.0] {
            wg.step(v);
        }
        assert_eq!(wg.step(1.0), 0.0);
    }

    #[test]
    fn random_is_seeded() {
        let cfg = DetectorConfig::new(DetectorKind::Random).with_seed(9);
        let a = run_file(&cfg, &series(&[0.0; 50]), 0.0).unwrap();
        let b = run_file(&cfg, &series(&[0.0; 50]), 0.0).unwrap();
        assert_eq!(a, b);
        assert!(a.scores.iter().all(|s| (0.0..1.0).contains(s)));
    }

    #[test]
    fn training_prefix_forced_to_zero() {
        let out = run_file(&DetectorConfig::new(DetectorKind::Null), &series(&[1.0; 100]), 0.15).unwrap();
        assert_eq!(out.len(), 100);
        assert_eq!(out.train_len, 15);
        assert!(out.scores[..15].iter().all(|&s| s == 0.0));
        assert!(out.scores[15..].iter().all(|&s| s == 0.5));
    }

    #[test]
    fn run_file_errors() {
        let null = DetectorConfig::new(DetectorKind::Null);
        assert!(matches!(run_file(&null, &[], 0.15), Err(Error::Input(_))));
        assert!(matches!(run_file(&null, &series(&[1.0]), 1.0), Err(Error::Config(_))));
        let mut s = series(&[1.0, 2.0]);
        s.swap(0, 1);
        assert!(matches!(run_file(&null, &s, 0.0), Err(Error::Stream(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let cfg = DetectorConfig::new(DetectorKind::Null).with_param("window", 5);
        assert!(matches!(Detector::new(&cfg, &[0.0]), Err(Error::Config(_))));
        let cfg = DetectorConfig::new(DetectorKind::HtmHd).with_param("sp.colums", 5);
        assert!(matches!(Detector::new(&cfg, &[0.0]), Err(Error::Config(_))));
        let cfg = DetectorConfig::new(DetectorKind::WindowedGaussian).with_param("window", "many");
        assert!(matches!(Detector::new(&cfg, &[0.0]), Err(Error::Config(_))));
        assert!("lstm".parse::<DetectorKind>().is_err());
        assert_eq!("htm_raw".parse::<DetectorKind>().unwrap(), DetectorKind::HtmRaw);
    }

    #[test]
    fn htm_scores_in_range_and_deterministic() {
        let values: Vec<f64> = (0..300).map(|i| ((i % 10) as f64).sin()).collect();
        let a = run_file(&small_htm(), &series(&values), 0.15).unwrap();
        let b = run_file(&small_htm(), &series(&values), 0.15).unwrap();
        assert_eq!(a, b);
        assert!(a.scores.iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn htm_raw_learns_periodic_signal() {
        let values: Vec<f64> = (0..600).map(|i| (i % 6) as f64).collect();
        let cfg = DetectorConfig { kind: DetectorKind::HtmRaw, ..small_htm() };
        let out = run_file(&cfg, &series(&values), 0.0).unwrap();
        let tail = &out.scores[500..];
        assert!(tail.iter().sum::<f64>() / (tail.len() as f64) < 0.1);
    }

    #[test]
    fn online_prefix_property() {
        // Scores up to record i depend only on records <= i.
        let values: Vec<f64> = (0..120).map(|i| (i % 7) as f64 * 0.5).collect();
        let mut changed = values.clone();
        for v in &mut changed[80..] {
            *v += 3.0;
        }
        let cfg = small_htm().with_param("encoder.value_min", -1.0).with_param("encoder.value_max", 8.0);
        let a = run_file(&cfg, &series(&values), 0.0).unwrap();
        let b = run_file(&cfg, &series(&changed), 0.0).unwrap();
        assert_eq!(a.scores[..80], b.scores[..80]);
    }
}
