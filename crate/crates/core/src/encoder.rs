//! Contiguous-block scalar encoder.
//!
//! A value in `[value_min, value_max]` selects one of `n_bits - w_active + 1`
//! buckets; the output SDR is the run of `w_active` bits starting at that
//! bucket. Nearby values share most of their bits, distant values none.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sdr::Sdr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarEncoderConfig {
    pub n_bits: usize,
    pub w_active: usize,
    pub value_min: f64,
    pub value_max: f64,
    pub clip_input: bool,
}

/// Output width used when calibrating from data.
pub const DEFAULT_N_BITS: usize = 400;
/// Active bits used when calibrating from data (about 5% of 400).
pub const DEFAULT_W_ACTIVE: usize = 21;
/// Fractional margin added on each side of the observed training range.
pub const CALIBRATION_MARGIN: f64 = 0.10;

impl ScalarEncoderConfig {
    pub fn new(n_bits: usize, w_active: usize, value_min: f64, value_max: f64) -> Result<Self> {
        let cfg = ScalarEncoderConfig { n_bits, w_active, value_min, value_max, clip_input: true };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range taken from `values` widened by [`CALIBRATION_MARGIN`] on both
    /// sides, with clipping on. A flat or empty sample gets a unit half-width.
    pub fn calibrated(n_bits: usize, w_active: usize, values: &[f64]) -> Result<Self> {
        let finite = values.iter().copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (lo, hi) = if !lo.is_finite() {
            (-1.0, 1.0)
        } else if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            let half = (lo.abs() * CALIBRATION_MARGIN).max(1.0);
            (lo - half, hi + half)
        } else {
            let margin = (hi - lo) * CALIBRATION_MARGIN;
            (lo - margin, hi + margin)
        };
        Self::new(n_bits, w_active, lo, hi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_active == 0 || self.w_active % 2 == 0 {
            return Err(Error::Config(format!("w_active must be a positive odd integer, got {}", self.w_active)));
        }
        if self.w_active >= self.n_bits {
            return Err(Error::Config(format!(
                "w_active ({}) must be smaller than n_bits ({})",
                self.w_active, self.n_bits
            )));
        }
        if !(self.value_min.is_finite() && self.value_max.is_finite()) || self.value_min >= self.value_max {
            return Err(Error::Config(format!(
                "encoder range [{}, {}] is empty or non-finite",
                self.value_min, self.value_max
            )));
        }
        Ok(())
    }

    fn buckets(&self) -> usize {
        self.n_bits - self.w_active
    }
}

/// Smallest value difference that moves the active block by one bit.
pub fn resolution(cfg: &ScalarEncoderConfig) -> f64 {
    (cfg.value_max - cfg.value_min) / cfg.buckets() as f64
}

/// First active bit for `value`.
pub fn bucket_index(value: f64, cfg: &ScalarEncoderConfig) -> Result<usize> {
    if !value.is_finite() {
        return Err(Error::Input(format!("non-finite value {value}")));
    }
    let clamped = if cfg.clip_input {
        value.clamp(cfg.value_min, cfg.value_max)
    } else if value < cfg.value_min || value > cfg.value_max {
        return Err(Error::Range { value, min: cfg.value_min, max: cfg.value_max });
    } else {
        value
    };
    let scaled = (clamped - cfg.value_min) / (cfg.value_max - cfg.value_min) * cfg.buckets() as f64;
    Ok((scaled.round() as usize).min(cfg.buckets()))
}

pub fn encode(value: f64, cfg: &ScalarEncoderConfig) -> Result<Sdr> {
    let start = bucket_index(value, cfg)?;
    let active = (start..start + cfg.w_active).map(|i| i as u32).collect();
    Ok(Sdr::from_sorted(cfg.n_bits, active))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdr::overlap;
    use proptest::prelude::*;

    fn cfg() -> ScalarEncoderConfig {
        ScalarEncoderConfig::new(400, 21, 0.0, 100.0).unwrap()
    }

    #[test]
    fn minimum_maps_to_leftmost_block() {
        let sdr = encode(0.0, &cfg()).unwrap();
        assert_eq!(sdr.active(), (0..21).collect::<Vec<u32>>().as_slice());
    }

    #[test]
    fn extremes_do_not_overlap() {
        // Block starts: 0 and 379; 379 > 21 so the blocks are disjoint.
        let lo = encode(0.0, &cfg()).unwrap();
        let hi = encode(100.0, &cfg()).unwrap();
        assert_eq!(hi.active()[0], 379);
        assert_eq!(overlap(&lo, &hi).unwrap(), 0);
    }

    #[test]
    fn deterministic() {
        assert_eq!(encode(42.5, &cfg()).unwrap(), encode(42.5, &cfg()).unwrap());
    }

    #[test]
    fn resolution_examples() {
        assert_eq!(resolution(&cfg()), 100.0 / 379.0);
        let two = ScalarEncoderConfig::new(22, 21, 0.0, 5.0).unwrap();
        assert_eq!(resolution(&two), 5.0);
        let wide = ScalarEncoderConfig::new(400, 21, 0.0, 200.0).unwrap();
        assert_eq!(resolution(&wide), 2.0 * resolution(&cfg()));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(encode(f64::NAN, &cfg()), Err(Error::Input(_))));
        let mut strict = cfg();
        strict.clip_input = false;
        assert!(matches!(encode(101.0, &strict), Err(Error::Range { .. })));
        assert_eq!(encode(1e9, &cfg()).unwrap(), encode(100.0, &cfg()).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(ScalarEncoderConfig::new(400, 20, 0.0, 1.0).is_err());
        assert!(ScalarEncoderConfig::new(21, 21, 0.0, 1.0).is_err());
        assert!(ScalarEncoderConfig::new(400, 21, 1.0, 1.0).is_err());
    }

    #[test]
    fn calibration_adds_margin() {
        let c = ScalarEncoderConfig::calibrated(400, 21, &[0.0, 10.0, 5.0]).unwrap();
        assert!((c.value_min + 1.0).abs() < 1e-12);
        assert!((c.value_max - 11.0).abs() < 1e-12);
        let flat = ScalarEncoderConfig::calibrated(400, 21, &[3.0, 3.0]).unwrap();
        assert!(flat.value_min < 3.0 && flat.value_max > 3.0);
        assert!(ScalarEncoderConfig::calibrated(400, 21, &[]).is_ok());
    }

    proptest! {
        #[test]
        fn cardinality_and_monotone(a in -10.0f64..110.0, b in -10.0f64..110.0) {
            let c = cfg();
            let ea = encode(a, &c).unwrap();
            let eb = encode(b, &c).unwrap();
            prop_assert_eq!(ea.cardinality(), 21);
            if a <= b {
                prop_assert!(ea.active()[0] <= eb.active()[0]);
            }
        }

        #[test]
        fn close_values_share_bits(v in 0.0f64..100.0, frac in 0.0f64..0.999) {
            let c = cfg();
            let d = frac * resolution(&c);
            let u = (v + d).min(100.0);
            let o = overlap(&encode(v, &c).unwrap(), &encode(u, &c).unwrap()).unwrap();
            prop_assert!(o >= 20);
        }

        #[test]
        fn distant_values_disjoint(v in 0.0f64..40.0, extra in 0.001f64..50.0) {
            let c = cfg();
            let u = v + 21.0 * resolution(&c) + extra;
            prop_assume!(u <= 100.0);
            let o = overlap(&encode(v, &c).unwrap(), &encode(u, &c).unwrap()).unwrap();
            prop_assert_eq!(o, 0);
        }
    }
}
