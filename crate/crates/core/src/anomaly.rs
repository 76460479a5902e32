//! Prediction-error scoring and the historical-distribution anomaly likelihood.

use std::collections::VecDeque;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::spatial_pooler::ColumnActivation;
use crate::temporal_memory::CellMatrix;

/// One scored record of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRecord {
    pub timestamp: DateTime<Utc>,
    pub value: f64,
    pub raw_score: f64,
    pub likelihood: f64,
    pub flagged: bool,
}

/// Fraction of active columns in which no cell was predicted at the previous
/// step. Zero when nothing is active.
pub fn raw_anomaly_score(
    prev_prediction: &CellMatrix,
    activation: &CellMatrix,
    cols: &ColumnActivation,
) -> Result<f64> {
    if !prev_prediction.same_shape(activation) {
        return Err(Error::Dimension {
            expected: prev_prediction.n_columns() * prev_prediction.cells_per_column(),
            actual: activation.n_columns() * activation.cells_per_column(),
        });
    }
    if cols.n_columns() != activation.n_columns() {
        return Err(Error::Dimension { expected: activation.n_columns(), actual: cols.n_columns() });
    }
    if cols.is_empty() {
        return Ok(0.0);
    }
    let predicted = cols.active().iter().filter(|&&c| prev_prediction.column_any(c as usize)).count();
    Ok((cols.len() - predicted) as f64 / cols.len() as f64)
}

/// Standard normal upper tail, Q(z) = P(Z > z).
pub fn gaussian_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikelihoodConfig {
    pub history_capacity: usize,
    pub short_window: usize,
    pub epsilon_sigma: f64,
}

impl Default for LikelihoodConfig {
    fn default() -> Self {
        LikelihoodConfig { history_capacity: 1000, short_window: 10, epsilon_sigma: 1e-6 }
    }
}

impl LikelihoodConfig {
    pub fn validate(&self) -> Result<()> {
        if self.short_window == 0 || self.short_window > self.history_capacity {
            return Err(Error::Config(format!(
                "short_window must be in 1..={}, got {}",
                self.history_capacity, self.short_window
            )));
        }
        if !(self.epsilon_sigma > 0.0) {
            return Err(Error::Config("epsilon_sigma must be positive".into()));
        }
        Ok(())
    }
}

/// Likelihood of the most recent scores under a Gaussian fitted to `history`
/// (oldest first): `1 - Q((mean_recent - mean) / sigma)`. Returns 0.5 while
/// fewer than `short_window` scores are available.
pub fn likelihood_of(history: &[f64], short_window: usize, epsilon_sigma: f64) -> f64 {
    if history.len() < short_window || history.is_empty() {
        return 0.5;
    }
    let n = history.len() as f64;
    let mean = history.iter().sum::<f64>() / n;
    let var = history.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt().max(epsilon_sigma);
    let recent = &history[history.len() - short_window..];
    let recent_mean = recent.iter().sum::<f64>() / short_window as f64;
    1.0 - gaussian_tail((recent_mean - mean) / sigma)
}

/// Rolling score history for one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodState {
    config: LikelihoodConfig,
    history: VecDeque<f64>,
}

impl LikelihoodState {
    pub fn new(config: LikelihoodConfig) -> Result<Self> {
        config.validate()?;
        Ok(LikelihoodState { history: VecDeque::with_capacity(config.history_capacity), config })
    }

    pub fn config(&self) -> &LikelihoodConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Pushes `raw` and returns the updated likelihood.
    pub fn update(&mut self, raw: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&raw) {
            return Err(Error::Domain(format!("raw score {raw} outside [0, 1]")));
        }
        if self.history.len() == self.config.history_capacity {
            self.history.pop_front();
        }
        self.history.push_back(raw);
        let history = self.history.make_contiguous();
        Ok(likelihood_of(history, self.config.short_window, self.config.epsilon_sigma))
    }
}

/// Which score the HTM detector emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyMode {
    /// Historical-distribution likelihood of the raw score.
    Likelihood,
    /// The raw prediction error itself.
    Raw,
}

pub fn flag(likelihood: f64, threshold: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Domain(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(likelihood >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrices(m: usize, n: usize, predicted: &[(usize, usize)]) -> (CellMatrix, CellMatrix) {
        let mut prev = CellMatrix::new(m, n);
        for &(i, j) in predicted {
            prev.set(i, j, true);
        }
        (prev, CellMatrix::new(m, n))
    }

    #[test]
    fn raw_score_examples() {
        let cols = ColumnActivation::new(100, 40, 0..40).unwrap();
        let all: Vec<_> = (0..40).map(|j| (0, j)).collect();
        let (prev, act) = matrices(2, 100, &all);
        assert_eq!(raw_anomaly_score(&prev, &act, &cols).unwrap(), 0.0);

        let (prev, act) = matrices(2, 100, &[(1, 60)]);
        assert_eq!(raw_anomaly_score(&prev, &act, &cols).unwrap(), 1.0);

        let half: Vec<_> = (0..20).map(|j| (j % 2, j * 2)).collect();
        let (prev, act) = matrices(2, 100, &half);
        assert_eq!(raw_anomaly_score(&prev, &act, &cols).unwrap(), 0.5);

        let none = ColumnActivation::new(100, 40, []).unwrap();
        assert_eq!(raw_anomaly_score(&prev, &act, &none).unwrap(), 0.0);
    }

    #[test]
    fn raw_score_shape_mismatch() {
        let cols = ColumnActivation::new(10, 2, [0]).unwrap();
        assert!(raw_anomaly_score(&CellMatrix::new(2, 10), &CellMatrix::new(3, 10), &cols).is_err());
        assert!(raw_anomaly_score(&CellMatrix::new(2, 11), &CellMatrix::new(2, 11), &cols).is_err());
    }

    #[test]
    fn constant_stream_is_neutral() {
        let mut st = LikelihoodState::new(LikelihoodConfig::default()).unwrap();
        for _ in 0..50 {
            assert!((st.update(0.3).unwrap() - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn burst_after_calm_is_extreme() {
        // 990 zeros then 10 ones: mean 0.01, sigma sqrt(0.0099) ~ 0.0995,
        // recent mean 1, z ~ 9.95.
        let mut st = LikelihoodState::new(LikelihoodConfig::default()).unwrap();
        for _ in 0..990 {
            st.update(0.0).unwrap();
        }
        let mut l = 0.0;
        for _ in 0..10 {
            l = st.update(1.0).unwrap();
        }
        assert!(l > 0.9999, "{l}");
    }

    #[test]
    fn below_mean_is_unlikely() {
        let mut st = LikelihoodState::new(LikelihoodConfig::default()).unwrap();
        for i in 0..200 {
            st.update(if i % 2 == 0 { 0.8 } else { 0.6 }).unwrap();
        }
        let mut l = 1.0;
        for _ in 0..10 {
            l = st.update(0.0).unwrap();
        }
        assert!(l < 0.5);
    }

    #[test]
    fn warm_up_never_flags_above_half() {
        let mut st = LikelihoodState::new(LikelihoodConfig::default()).unwrap();
        for _ in 0..9 {
            let l = st.update(1.0).unwrap();
            assert!(!flag(l, 0.51).unwrap());
        }
    }

    #[test]
    fn flag_examples() {
        assert!(flag(0.9, 0.5).unwrap());
        assert!(!flag(0.4, 0.5).unwrap());
        assert!(flag(0.5497, 0.5497).unwrap());
        assert!(!flag(0.5496, 0.5497).unwrap());
        assert!(flag(0.5, 1.5).is_err());
    }

    #[test]
    fn history_is_bounded() {
        let cfg = LikelihoodConfig { history_capacity: 20, short_window: 5, epsilon_sigma: 1e-6 };
        let mut st = LikelihoodState::new(cfg).unwrap();
        for _ in 0..100 {
            st.update(0.2).unwrap();
        }
        assert_eq!(st.len(), 20);
        assert!(st.update(1.5).is_err());
        assert!(LikelihoodState::new(LikelihoodConfig { short_window: 30, ..cfg }).is_err());
    }

    #[test]
    fn gaussian_tail_values() {
        assert_eq!(gaussian_tail(0.0), 0.5);
        assert!((gaussian_tail(1.959963984540054) - 0.025).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn monotone_in_recent_mean(base in proptest::collection::vec(0.0f64..1.0, 30..60),
                                   lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
            prop_assume!(lo < hi);
            // Same history statistics, different recent window.
            let mut a = base.clone();
            let mut b = base.clone();
            a.extend([lo, hi]);
            b.extend([hi, lo]);
            let la = likelihood_of(&a, 1, 1e-6);
            let lb = likelihood_of(&b, 1, 1e-6);
            prop_assert!(la >= lb);
            prop_assert!((0.0..=1.0).contains(&la));
        }
    }
}
