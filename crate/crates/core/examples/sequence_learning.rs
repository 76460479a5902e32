//! One-pass sequence learning: a repeating eight-symbol sequence is learned
//! online, after which an unseen symbol is flagged as fully novel.
//!
//! cargo run --release --example sequence_learning

use chrono::{DateTime, Duration, Utc};
use htm_anomaly::anomaly::AnomalyMode;
use htm_anomaly::detectors::{HtmDetector, HtmSettings};

fn main() -> htm_anomaly::Result<()> {
    let settings = HtmSettings { value_range: Some((0.0, 10.0)), mode: AnomalyMode::Raw, ..HtmSettings::default() };
    let mut htm = HtmDetector::new(settings, &[])?;
    let t0 = DateTime::<Utc>::from_timestamp(0, 0).unwrap();
    let symbols = [0.0, 3.0, 1.0, 6.0, 2.0, 7.0, 4.0, 5.0];
    let reps = 200;
    let mut raw = Vec::new();
    let start = std::time::Instant::now();
    for i in 0..symbols.len() * reps {
        let r = htm.process(t0 + Duration::seconds(i as i64), symbols[i % symbols.len()])?;
        raw.push(r.raw_score);
    }
    let tail = &raw[raw.len() * 9 / 10..];
    println!(
        "{} records in {:.2?}; mean raw score over the last 10%: {:.4}",
        raw.len(),
        start.elapsed(),
        tail.iter().sum::<f64>() / tail.len() as f64
    );
    for rep in [0, 1, 2, 5, 10, 20, 50, 100, 199] {
        let chunk = &raw[rep * 8..rep * 8 + 8];
        println!("  repetition {rep:>3}: mean raw {:.3}", chunk.iter().sum::<f64>() / 8.0);
    }
    let novel = htm.process(t0 + Duration::seconds(raw.len() as i64), 9.5)?;
    println!("unseen symbol 9.5 -> raw score {:.3}", novel.raw_score);
    println!("memory: {} segments, {} synapses", htm.memory().segment_count(), htm.memory().synapse_count());
    Ok(())
}
