//! Scalar encoding and spatial pooling: nearby values share bits and
//! columns, distant values do not.
//!
//! cargo run --release --example encode_and_pool

use htm_anomaly::encoder::{self, ScalarEncoderConfig};
use htm_anomaly::sdr;
use htm_anomaly::spatial_pooler::{SpatialPooler, SpatialPoolerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> htm_anomaly::Result<()> {
    let enc = ScalarEncoderConfig::new(400, 21, 0.0, 100.0)?;
    println!("encoder resolution: {:.4} per bucket", encoder::resolution(&enc));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sp = SpatialPooler::new(enc.n_bits, SpatialPoolerConfig::default(), &mut rng)?;

    // A short training pass over the input range.
    for round in 0..5 {
        for v in 0..100 {
            sp.compute(&encoder::encode(v as f64 + 0.1 * round as f64, &enc)?, true)?;
        }
    }

    let base = 50.0;
    let x0 = encoder::encode(base, &enc)?;
    let c0 = sp.compute(&x0, false)?;
    println!("value  input-overlap  column-overlap");
    for v in [50.0, 50.5, 51.0, 52.0, 55.0, 60.0, 80.0] {
        let x = encoder::encode(v, &enc)?;
        let c = sp.compute(&x, false)?;
        let shared = c.active().iter().filter(|&&col| c0.contains(col as usize)).count();
        println!("{v:>5}  {:>13}  {:>14}", sdr::overlap(&x0, &x)?, shared);
    }
    println!("{} of {} columns active", c0.len(), c0.n_columns());
    Ok(())
}
