//! The baseline detectors side by side on a signal with one spike and one
//! sustained level change.
//!
//! cargo run --release --example baselines

use chrono::{DateTime, Duration, Utc};
use htm_anomaly::detectors::{DetectorConfig, DetectorKind, run_file};
use htm_anomaly::series::Record;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> htm_anomaly::Result<()> {
    let n = 4000;
    let t0 = DateTime::<Utc>::from_timestamp(1_700_000_000, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let series: Vec<Record> = (0..n)
        .map(|i| {
            let mut v = noise.sample(&mut rng);
            if i == 1500 {
                v += 12.0;
            }
            if i >= 3000 {
                v += 3.0;
            }
            Record { timestamp: t0 + Duration::seconds(i as i64), value: v }
        })
        .collect();

    let probes = [1499, 1500, 1501, 2999, 3000, 3100, 3999];
    print!("{:<18}", "detector");
    for p in probes {
        print!("{p:>9}");
    }
    println!();
    for (cfg, label) in [
        (DetectorConfig::new(DetectorKind::WindowedGaussian).with_param("window", 1000), "windowed_gaussian"),
        (DetectorConfig::new(DetectorKind::Threshold), "threshold (abs)"),
        (
            DetectorConfig::new(DetectorKind::Threshold).with_param("feature", "rms").with_param("rms_window", 50),
            "threshold (rms)",
        ),
        (DetectorConfig::new(DetectorKind::Random).with_seed(4), "random"),
        (DetectorConfig::new(DetectorKind::Null), "null"),
    ] {
        let out = run_file(&cfg, &series, 0.15)?;
        print!("{label:<18}");
        for p in probes {
            print!("{:>9.4}", out.scores[p]);
        }
        println!();
    }
    Ok(())
}
