//! Window construction, sigmoid detection credit and threshold optimisation
//! on a hand-made two-file corpus.
//!
//! cargo run --release --example nab_scoring

use chrono::{DateTime, Duration, Utc};
use htm_anomaly::detectors::DetectorOutput;
use htm_anomaly::nab::{self, AnomalyWindow, ScoringProfile};

fn output(n: usize, hits: &[(usize, f64)]) -> DetectorOutput {
    let t0 = DateTime::<Utc>::from_timestamp(1_700_000_000, 0).unwrap();
    let mut scores = vec![0.0; n];
    for &(i, s) in hits {
        scores[i] = s;
    }
    DetectorOutput {
        timestamps: (0..n).map(|i| t0 + Duration::seconds(i as i64)).collect(),
        values: vec![0.0; n],
        scores,
        train_len: 0,
    }
}

fn main() -> htm_anomaly::Result<()> {
    println!("detection credit across a window (standard profile)");
    let p = ScoringProfile::standard();
    for y in [-1.0, -0.5, -0.31, 0.0, 0.5, 2.0, 5.0] {
        println!("  y={y:>5.2}  sigma={:+.4}", nab::sigma(y, &p));
    }

    // Two files of 1000 records with two labels each: 50-record windows.
    let a = output(1000, &[(210, 0.9), (640, 0.7), (900, 0.95)]);
    let b = output(1000, &[(100, 0.6), (480, 0.8)]);
    let labels = |out: &DetectorOutput, at: &[usize]| at.iter().map(|&i| out.timestamps[i]).collect::<Vec<_>>();
    let wa = nab::make_windows(&labels(&a, &[220, 650]), &a.timestamps, 0.10, "a.csv")?;
    let wb = nab::make_windows(&labels(&b, &[300, 500]), &b.timestamps, 0.10, "b.csv")?;
    for w in wa.iter().chain(&wb) {
        println!("window {} {} .. {}", w.source_file, w.start.time(), w.end.time());
    }

    let runs: Vec<(&DetectorOutput, &[AnomalyWindow])> = vec![(&a, &wa), (&b, &wb)];
    for profile in [ScoringProfile::standard(), ScoringProfile::low_fp(), ScoringProfile::low_fn()] {
        let r = nab::evaluate("example", &runs, &profile)?;
        println!(
            "{:<9} threshold {:.2}  raw {:+.4}  null {:+.4}  perfect {:+.4}  normalized {:.2}",
            r.profile, r.optimized_threshold, r.raw_score, r.null_raw, r.perfect_raw, r.normalized_score
        );
    }
    Ok(())
}
