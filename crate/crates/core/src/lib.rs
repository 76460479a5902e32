//! Streaming Hierarchical Temporal Memory anomaly detection for
//! predictive-maintenance time series.
//!
//! The pipeline for each record is encode → spatial pool → temporal memory →
//! raw prediction error → anomaly likelihood. Around it sit baseline
//! detectors, a NAB-style benchmark scorer, and a synthesizer that transplants
//! bearing-failure power spectra onto clean vibration recordings.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory; the `htm-anomaly` binary wraps the [`harness`] module.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anomaly;
pub mod detectors;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod nab;
pub mod psd_synth;
pub mod sdr;
pub mod series;
pub mod spatial_pooler;
pub mod temporal_memory;

pub use error::{Error, Result};
