//! Synthetic bearing-failure data.
//!
//! [`psd_map`] transplants the frame-to-frame power changes of a degrading
//! source recording onto a clean target recording: each target frame's
//! spectrum is scaled, band by band, by the square root of the source's power
//! ratio between consecutive frames, then resynthesised by weighted
//! overlap-add. [`generate_degradation`] produces a parametric run-to-failure
//! stand-in with labelled growth breakpoints.

use std::f64::consts::PI;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    /// Periodic Hann; sums to a constant at 50% hop.
    Hann,
    Rect,
}

impl Taper {
    pub fn weights(self, len: usize) -> Vec<f64> {
        match self {
            Taper::Rect => vec![1.0; len],
            Taper::Hann => (0..len).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos()).collect(),
        }
    }
}

impl std::str::FromStr for Taper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(Taper::Hann),
            "rect" => Ok(Taper::Rect),
            other => Err(Error::Config(format!("unknown taper `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub window_len: usize,
    pub hop: usize,
    /// Width in Hz of the bands over which power ratios are measured.
    pub bin_size: f64,
    pub sample_rate: f64,
    pub taper: Taper,
    pub ratio_clamp: f64,
    /// Band powers below this are treated as this when forming ratios.
    pub power_floor: f64,
}

impl SynthSpec {
    /// Hann frames of 1024 samples at 50% hop, one FFT bin per band.
    pub fn new(sample_rate: f64) -> Self {
        SynthSpec {
            window_len: 1024,
            hop: 512,
            bin_size: sample_rate / 1024.0,
            sample_rate,
            taper: Taper::Hann,
            ratio_clamp: 10.0,
            power_floor: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len < 2 || !self.window_len.is_power_of_two() {
            return Err(Error::Config(format!("window_len {} must be a power of two >= 2", self.window_len)));
        }
        if self.hop == 0 || self.hop > self.window_len {
            return Err(Error::Config(format!("hop {} must be in 1..={}", self.hop, self.window_len)));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Config(format!("invalid sample rate {}", self.sample_rate)));
        }
        let resolution = self.sample_rate / self.window_len as f64;
        if !(self.bin_size >= resolution * (1.0 - 1e-9)) || !self.bin_size.is_finite() {
            return Err(Error::Config(format!(
                "bin_size {} is finer than the FFT resolution {resolution}",
                self.bin_size
            )));
        }
        if !(self.ratio_clamp > 1.0) {
            return Err(Error::Config("ratio_clamp must exceed 1".into()));
        }
        if !(self.power_floor > 0.0) {
            return Err(Error::Config("power_floor must be positive".into()));
        }
        Ok(())
    }

    /// Band of FFT bin `k` (either half of the spectrum).
    pub fn band_of(&self, k: usize) -> usize {
        let k = k.min(self.window_len - k % self.window_len);
        let hz = k as f64 * self.sample_rate / self.window_len as f64;
        (hz / self.bin_size * (1.0 + 1e-12)).floor() as usize
    }

    pub fn band_count(&self) -> usize {
        self.band_of(self.window_len / 2) + 1
    }

    /// Frame start offsets covering `len` samples; the first frame begins
    /// `window_len - hop` samples before the data so every sample is covered
    /// by a full set of overlapping frames.
    fn frame_starts(&self, len: usize) -> Vec<isize> {
        let lead = (self.window_len - self.hop) as isize;
        let mut starts = Vec::new();
        let mut s = -lead;
        while s < len as isize {
            starts.push(s);
            s += self.hop as isize;
        }
        starts
    }
}

/// A sample sequence with its rate.
#[derive(Debug, Clone, Copy)]
pub struct Sampled<'a> {
    pub samples: &'a [f64],
    pub sample_rate: f64,
}

struct Framer {
    spec: SynthSpec,
    taper: Vec<f64>,
    forward: std::sync::Arc<dyn Fft<f64>>,
    inverse: std::sync::Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl Framer {
    fn new(spec: &SynthSpec) -> Self {
        let mut planner = FftPlanner::new();
        Framer {
            spec: spec.clone(),
            taper: spec.taper.weights(spec.window_len),
            forward: planner.plan_fft_forward(spec.window_len),
            inverse: planner.plan_fft_inverse(spec.window_len),
            buf: vec![Complex64::default(); spec.window_len],
        }
    }

    /// Tapered FFT of `x[start..start + L]`, zero outside `x`.
    fn spectrum(&mut self, x: &[f64], start: isize) -> &mut [Complex64] {
        for (i, slot) in self.buf.iter_mut().enumerate() {
            let n = start + i as isize;
            let v = if n >= 0 && (n as usize) < x.len() { x[n as usize] } else { 0.0 };
            *slot = Complex64::new(v * self.taper[i], 0.0);
        }
        self.forward.process(&mut self.buf);
        &mut self.buf
    }

    fn band_powers(&mut self, x: &[f64], start: isize) -> Vec<f64> {
        let mut p = vec![0.0; self.spec.band_count()];
        let half = self.spec.window_len / 2;
        let spec = self.spec.clone();
        let buf = self.spectrum(x, start);
        for (k, c) in buf.iter().enumerate().take(half + 1) {
            p[spec.band_of(k)] += c.norm_sqr();
        }
        p
    }
}

/// Amplitude scale factors per frame and band, from the source recording.
/// The first frame is 1 everywhere; frames that would reach past either end
/// of the source read its nearest full frame instead.
pub fn band_ratios(bearing: &[f64], target_len: usize, spec: &SynthSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if bearing.len() < spec.window_len {
        return Err(Error::Input(format!(
            "source has {} samples, fewer than one {}-sample frame",
            bearing.len(),
            spec.window_len
        )));
    }
    let last = (bearing.len() - spec.window_len) as isize;
    let mut framer = Framer::new(spec);
    let mut prev: Option<Vec<f64>> = None;
    let mut out = Vec::new();
    for start in spec.frame_starts(target_len) {
        let p = framer.band_powers(bearing, start.clamp(0, last));
        let c = match &prev {
            None => vec![1.0; p.len()],
            Some(q) => p
                .iter()
                .zip(q)
                .map(|(&now, &before)| {
                    (now.max(spec.power_floor) / before.max(spec.power_floor))
                        .sqrt()
                        .clamp(1.0 / spec.ratio_clamp, spec.ratio_clamp)
                })
                .collect(),
        };
        out.push(c);
        prev = Some(p);
    }
    Ok(out)
}

/// Maps the source's band-power trajectory onto `target`. Output has the
/// target's length.
pub fn psd_map(bearing: Sampled<'_>, target: Sampled<'_>, spec: &SynthSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    for (what, s) in [("source", &bearing), ("target", &target)] {
        if (s.sample_rate - spec.sample_rate).abs() > 1e-9 * spec.sample_rate {
            return Err(Error::Input(format!(
                "{what} sampled at {} Hz, expected {} Hz",
                s.sample_rate, spec.sample_rate
            )));
        }
    }
    let p = target.samples;
    if p.len() < spec.window_len {
        return Err(Error::Input(format!(
            "target has {} samples, fewer than one {}-sample frame",
            p.len(),
            spec.window_len
        )));
    }
    if bearing.samples.len() < p.len() {
        return Err(Error::Input(format!(
            "source has {} samples but the target needs {}",
            bearing.samples.len(),
            p.len()
        )));
    }
    let ratios = band_ratios(bearing.samples, p.len(), spec)?;
    let l = spec.window_len;
    let mut framer = Framer::new(spec);
    let mut out = vec![0.0; p.len()];
    let mut weight = vec![0.0; p.len()];
    for (start, c) in spec.frame_starts(p.len()).into_iter().zip(&ratios) {
        framer.spectrum(p, start);
        for k in 0..l {
            let g = spec.band_of(k);
            framer.buf[k] *= c[g];
        }
        framer.inverse.process(&mut framer.buf);
        for i in 0..l {
            let n = start + i as isize;
            if n >= 0 && (n as usize) < p.len() {
                out[n as usize] += framer.buf[i].re / l as f64;
                weight[n as usize] += framer.taper[i];
            }
        }
    }
    for (o, w) in out.iter_mut().zip(&weight) {
        if *w > 1e-12 {
            *o /= w;
        }
    }
    Ok(out)
}

/// Power of `x` in `[lo, hi)` Hz, from a single rectangular FFT.
pub fn band_power(x: &[f64], sample_rate: f64, lo: f64, hi: f64) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = sample_rate / n as f64;
    buf.iter()
        .enumerate()
        .take(n / 2 + 1)
        .filter(|(k, _)| {
            let f = *k as f64 * df;
            f >= lo && f < hi
        })
        .map(|(k, c)| {
            // One-sided: interior bins stand for both halves.
            let both = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            both * c.norm_sqr()
        })
        .sum::<f64>()
        / (n as f64 * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub freq: f64,
    pub amplitude: f64,
}

/// From `at_s` seconds the fault amplitude moves linearly to `amplitude`
/// over `ramp_s` seconds (a step when 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub at_s: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub ramp_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationModel {
    pub sample_rate: f64,
    pub baseline_sigma: f64,
    /// Stationary machine tones present throughout.
    #[serde(default)]
    pub carriers: Vec<Tone>,
    pub fault_freqs: Vec<f64>,
    /// Fault amplitude before the first breakpoint.
    #[serde(default)]
    pub initial_amplitude: f64,
    pub growth: Vec<GrowthStep>,
    pub start: DateTime<Utc>,
}

impl DegradationModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Config(format!("invalid sample rate {}", self.sample_rate)));
        }
        if !(self.baseline_sigma >= 0.0) {
            return Err(Error::Config("baseline_sigma must be non-negative".into()));
        }
        let nyquist = self.sample_rate / 2.0;
        for f in self.fault_freqs.iter().chain(self.carriers.iter().map(|t| &t.freq)) {
            if !(*f >= 0.0 && *f <= nyquist) {
                return Err(Error::Config(format!("frequency {f} Hz outside [0, {nyquist}]")));
            }
        }
        let mut last = f64::NEG_INFINITY;
        for g in &self.growth {
            if !(g.at_s > last) || !(g.ramp_s >= 0.0) || !g.amplitude.is_finite() {
                return Err(Error::Config(
                    "growth breakpoints must be strictly increasing with non-negative ramps".into(),
                ));
            }
            last = g.at_s;
        }
        Ok(())
    }

    /// Fault amplitude at `t` seconds.
    pub fn amplitude_at(&self, t: f64) -> f64 {
        let mut a = self.initial_amplitude;
        for g in &self.growth {
            if t < g.at_s {
                break;
            }
            let from = a;
            a = if g.ramp_s > 0.0 && t < g.at_s + g.ramp_s {
                from + (g.amplitude - from) * (t - g.at_s) / g.ramp_s
            } else {
                g.amplitude
            };
        }
        a
    }

    /// Closed-form RMS of the signal model at fault amplitude `a`.
    pub fn rms_at_amplitude(&self, a: f64) -> f64 {
        let tones: f64 = self.carriers.iter().map(|t| t.amplitude * t.amplitude / 2.0).sum();
        let faults = self.fault_freqs.len() as f64 * a * a / 2.0;
        (self.baseline_sigma.powi(2) + tones + faults).sqrt()
    }
}

/// Sample `i` at rate `sr`, counted from `start`.
pub fn sample_time(start: DateTime<Utc>, i: usize, sample_rate: f64) -> DateTime<Utc> {
    start + Duration::nanoseconds((i as f64 * 1e9 / sample_rate).round() as i64)
}

/// Noise plus carriers plus fault tones following the growth schedule.
/// Returns the series and one label per breakpoint inside the duration.
pub fn generate_degradation(
    model: &DegradationModel,
    duration_s: f64,
    seed: u64,
) -> Result<(Vec<Record>, Vec<DateTime<Utc>>)> {
    model.validate()?;
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::Domain(format!("duration {duration_s} must be positive")));
    }
    let n = (duration_s * model.sample_rate).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let carrier_phase: Vec<f64> = model.carriers.iter().map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    let fault_phase: Vec<f64> = model.fault_freqs.iter().map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    let noise = Normal::new(0.0, model.baseline_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut series = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / model.sample_rate;
        let mut v = noise.sample(&mut rng);
        for (tone, ph) in model.carriers.iter().zip(&carrier_phase) {
            v += tone.amplitude * (2.0 * PI * tone.freq * t + ph).sin();
        }
        let a = model.amplitude_at(t);
        if a != 0.0 {
            for (f, ph) in model.fault_freqs.iter().zip(&fault_phase) {
                v += a * (2.0 * PI * f * t + ph).sin();
            }
        }
        series.push(Record { timestamp: sample_time(model.start, i, model.sample_rate), value: v });
    }
    let labels = model
        .growth
        .iter()
        .filter(|g| g.at_s < n as f64 / model.sample_rate)
        .map(|g| sample_time(model.start, (g.at_s * model.sample_rate).ceil() as usize, model.sample_rate))
        .collect();
    Ok((series, labels))
}

/// Recipe for a labelled corpus of degradation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub files: usize,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub baseline_sigma: f64,
    pub carriers: Vec<Tone>,
    pub fault_freqs: Vec<f64>,
    /// Growth breakpoints per file, spread over the part after `quiet_fraction`.
    pub breakpoints: usize,
    /// Fault amplitude added at each breakpoint (jittered by up to ±20%).
    pub amplitude_step: f64,
    /// Leading share of each file kept free of breakpoints.
    pub quiet_fraction: f64,
    pub seed: u64,
    pub start: DateTime<Utc>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            files: 10,
            duration_s: 60.0,
            sample_rate: 100.0,
            baseline_sigma: 0.02,
            carriers: vec![Tone { freq: 12.5, amplitude: 1.0 }],
            fault_freqs: vec![6.25],
            breakpoints: 3,
            amplitude_step: 0.35,
            quiet_fraction: 0.3,
            seed: 7,
            start: DateTime::<Utc>::from_timestamp(1_704_067_200, 0).unwrap_or_default(),
        }
    }
}

/// One generated file of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFile {
    pub name: String,
    pub records: Vec<Record>,
    pub labels: Vec<DateTime<Utc>>,
}

/// Generates `spec.files` runs with seeded breakpoint times and amplitudes.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<SynthFile>> {
    if spec.files == 0 {
        return Err(Error::Config("corpus needs at least one file".into()));
    }
    if !(0.0..1.0).contains(&spec.quiet_fraction) {
        return Err(Error::Config("quiet_fraction must be in [0, 1)".into()));
    }
    let width = spec.files.to_string().len().max(2);
    (0..spec.files)
        .map(|i| {
            let seed = spec.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let span = spec.duration_s * (1.0 - spec.quiet_fraction);
            let slot = span / spec.breakpoints.max(1) as f64;
            let mut amplitude = 0.0;
            let growth = (0..spec.breakpoints)
                .map(|j| {
                    let at =
                        spec.duration_s * spec.quiet_fraction + slot * (j as f64 + 0.25 + 0.5 * rng.random::<f64>());
                    amplitude += spec.amplitude_step * (0.8 + 0.4 * rng.random::<f64>());
                    GrowthStep { at_s: (at * spec.sample_rate).round() / spec.sample_rate, amplitude, ramp_s: 0.0 }
                })
                .collect();
            let model = DegradationModel {
                sample_rate: spec.sample_rate,
                baseline_sigma: spec.baseline_sigma,
                carriers: spec.carriers.clone(),
                fault_freqs: spec.fault_freqs.clone(),
                initial_amplitude: 0.0,
                growth,
                start: spec.start,
            };
            let (records, labels) = generate_degradation(&model, spec.duration_s, seed)?;
            Ok(SynthFile { name: format!("run_{i:0width$}.csv"), records, labels })
        })
        .collect()
}
