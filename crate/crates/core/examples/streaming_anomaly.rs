//! Continuous adaptation: an HTM detector learns a periodic vibration,
//! reacts to a permanent 3x amplitude shift, then settles on the new baseline.
//!
//! cargo run --release --example streaming_anomaly

use chrono::{DateTime, Duration, Utc};
use htm_anomaly::detectors::{DEFAULT_FLAG_THRESHOLD, DetectorConfig, DetectorKind, run_file};
use htm_anomaly::series::Record;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> htm_anomaly::Result<()> {
    let shift_at = 3000;
    let n = 5000;
    let period = 25.0;
    let t0 = DateTime::<Utc>::from_timestamp(1_700_000_000, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let series: Vec<Record> = (0..n)
        .map(|i| {
            let gain = if i < shift_at { 1.0 } else { 3.0 };
            let phase = 2.0 * std::f64::consts::PI * i as f64 / period;
            Record { timestamp: t0 + Duration::seconds(i as i64), value: gain * phase.sin() + noise.sample(&mut rng) }
        })
        .collect();

    let cfg = DetectorConfig::new(DetectorKind::HtmHd).with_seed(1);
    let out = run_file(&cfg, &series, 0.15)?;
    let flagged = |i: usize| out.scores[i] >= DEFAULT_FLAG_THRESHOLD;

    let before = (out.train_len..shift_at).filter(|&i| flagged(i)).count();
    println!("{} of {} test records before the shift flagged", before, shift_at - out.train_len);
    let Some(first) = (shift_at..n).find(|&i| flagged(i)) else {
        println!("shift never flagged");
        return Ok(());
    };
    let settled = (first..n).find(|&i| !flagged(i)).unwrap_or(n);
    println!("shift flagged {} records after onset", first - shift_at);
    println!("alarm episode ends {} records after onset", settled - shift_at);
    for off in (0..1000).step_by(100) {
        println!("  +{off:>4}: likelihood {:.4}", out.scores[shift_at + off]);
    }
    Ok(())
}
