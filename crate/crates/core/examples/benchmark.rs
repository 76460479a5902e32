//! End-to-end benchmark: synthesize a labelled degradation corpus, run every
//! detector over it and print the normalized score table.
//!
//! cargo run --release --example benchmark [files] [seed]

use std::time::Instant;

use htm_anomaly::detectors::{DEFAULT_TRAIN_FRACTION, DetectorConfig, DetectorKind, DetectorOutput, run_file};
use htm_anomaly::nab::{self, AnomalyWindow, DEFAULT_WINDOW_BUDGET, ScoringProfile};
use htm_anomaly::psd_synth::{CorpusSpec, generate_corpus};
use rayon::prelude::*;

fn main() -> htm_anomaly::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut spec = CorpusSpec::default();
    if let Some(files) = args.next() {
        spec.files = files.parse().expect("files must be an integer");
    }
    if let Some(seed) = args.next() {
        spec.seed = seed.parse().expect("seed must be an integer");
    }
    let corpus = generate_corpus(&spec)?;
    let labels: usize = corpus.iter().map(|f| f.labels.len()).sum();
    println!("corpus: {} files, {} labels, seed {}", corpus.len(), labels, spec.seed);

    let windows: Vec<Vec<AnomalyWindow>> = corpus
        .iter()
        .map(|f| {
            let ts: Vec<_> = f.records.iter().map(|r| r.timestamp).collect();
            nab::make_windows(&f.labels, &ts, DEFAULT_WINDOW_BUDGET, &f.name)
        })
        .collect::<htm_anomaly::Result<_>>()?;

    let profiles = [ScoringProfile::standard(), ScoringProfile::low_fp(), ScoringProfile::low_fn()];
    let mut results = Vec::new();
    for kind in [
        DetectorKind::HtmHd,
        DetectorKind::HtmRaw,
        DetectorKind::WindowedGaussian,
        DetectorKind::Threshold,
        DetectorKind::Random,
        DetectorKind::Null,
    ] {
        let cfg = DetectorConfig::new(kind).with_seed(spec.seed);
        let started = Instant::now();
        let outputs: Vec<DetectorOutput> = corpus
            .par_iter()
            .map(|f| run_file(&cfg, &f.records, DEFAULT_TRAIN_FRACTION))
            .collect::<htm_anomaly::Result<_>>()?;
        let runtime = started.elapsed().as_secs_f64();
        let runs: Vec<(&DetectorOutput, &[AnomalyWindow])> =
            outputs.iter().zip(&windows).map(|(o, w)| (o, w.as_slice())).collect();
        for profile in &profiles {
            let mut r = nab::evaluate(kind.name(), &runs, profile)?;
            r.runtime_s = Some(runtime);
            results.push(r);
        }
    }
    print!("{}", nab::render_table(&results));
    Ok(())
}
