//! Transplanting degradation events: wherever a band's power jumps between
//! consecutive frames of the source recording, the same jump is imposed on
//! the matching frame of a clean target. Other bands pass through.
//!
//! cargo run --release --example psd_mapping

use std::f64::consts::PI;

use htm_anomaly::psd_synth::{self, Sampled, SynthSpec, Taper};

fn tone(i: usize, sr: f64, f: f64) -> f64 {
    (2.0 * PI * f * i as f64 / sr).sin()
}

fn main() -> htm_anomaly::Result<()> {
    let sr = 1024.0;
    let frame = 256;
    let spec = SynthSpec { window_len: frame, hop: frame, taper: Taper::Rect, bin_size: 16.0, ..SynthSpec::new(sr) };
    // Source: the 64 Hz fault amplitude steps up at frames 3 and 6.
    let n = frame * 8;
    let source: Vec<f64> = (0..n)
        .map(|i| {
            let a = match i / frame {
                0..=2 => 1.0,
                3..=5 => 2.0,
                _ => 3.0,
            };
            a * tone(i, sr, 64.0)
        })
        .collect();
    // Target: a clean machine with 64 Hz and 200 Hz content.
    let target: Vec<f64> = (0..n).map(|i| 0.5 * tone(i, sr, 64.0) + 0.3 * tone(i, sr, 200.0)).collect();

    let mapped = psd_synth::psd_map(
        Sampled { samples: &source, sample_rate: sr },
        Sampled { samples: &target, sample_rate: sr },
        &spec,
    )?;

    println!("frame  64 Hz power ratio  200 Hz power ratio");
    for f in 0..n / frame {
        let (a, b) = (&target[f * frame..(f + 1) * frame], &mapped[f * frame..(f + 1) * frame]);
        let ratio = |lo, hi| psd_synth::band_power(b, sr, lo, hi) / psd_synth::band_power(a, sr, lo, hi);
        println!("{f:>5}  {:>17.3}  {:>18.3}", ratio(56.0, 72.0), ratio(192.0, 208.0));
    }
    Ok(())
}
