//! Saving a trained HTM model and resuming from it: the restored model scores
//! the remaining stream exactly as the uninterrupted one does.
//!
//! cargo run --release --example model_state

use chrono::{DateTime, Duration, Utc};
use htm_anomaly::detectors::{Detector, DetectorConfig, DetectorKind, run_with, stream};
use htm_anomaly::harness;
use htm_anomaly::series::Record;

fn main() -> htm_anomaly::Result<()> {
    let t0 = DateTime::<Utc>::from_timestamp(1_700_000_000, 0).unwrap();
    let series: Vec<Record> = (0..3000)
        .map(|i| Record { timestamp: t0 + Duration::seconds(i), value: ((i % 20) as f64 * 0.3).sin() })
        .collect();
    let (head, tail) = series.split_at(2000);

    let cfg = DetectorConfig::new(DetectorKind::HtmHd).with_seed(8);
    let (_, detector) = run_with(&cfg, head, 0.15, |_| Ok(()))?;
    let htm = detector.into_htm().expect("htm detector");
    println!("trained on {} records: {} segments", htm.records_seen(), htm.memory().segment_count());

    let path = std::env::temp_dir().join("htm_anomaly_model_state.json");
    harness::save_model(&path, &htm)?;
    println!("model written to {} ({} bytes)", path.display(), std::fs::metadata(&path).map_or(0, |m| m.len()));

    let mut resumed = Detector::from_htm(harness::load_model(&path)?);
    let mut original = Detector::from_htm(htm);
    let a = stream(&mut original, tail, 0)?;
    let b = stream(&mut resumed, tail, 0)?;
    let same = a.scores.iter().zip(&b.scores).all(|(x, y)| x.to_bits() == y.to_bits());
    println!("resumed scores identical to uninterrupted run: {same}");
    println!("mean likelihood over the continuation: {:.4}", b.scores.iter().sum::<f64>() / b.len() as f64);
    std::fs::remove_file(&path).ok();
    Ok(())
}
