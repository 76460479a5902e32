//! Capacity and noise robustness of sparse distributed representations:
//! exact false-match probabilities against a Monte Carlo estimate.
//!
//! cargo run --release --example sdr_capacity

use htm_anomaly::sdr::{self, MatchSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> htm_anomaly::Result<()> {
    for (n, w) in [(256, 8), (1024, 20), (2048, 40)] {
        let c = sdr::capacity(n, w)?;
        println!("n={n:>4} w={w:>2}: {} distinct patterns (~1e{})", c, sdr::decimal_order(&c));
    }

    println!();
    println!("false-match probability, n=1024 w=20");
    let (n, w) = (1024usize, 20usize);
    let trials = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reference = sdr::random_sdr_with(&mut rng, n, w)?;
    let mut overlaps = vec![0usize; w + 1];
    for _ in 0..trials {
        let other = sdr::random_sdr_with(&mut rng, n, w)?;
        overlaps[sdr::overlap(&reference, &other)?] += 1;
    }
    for theta in [2usize, 3, 4, 6, 10] {
        let exact = sdr::false_match_probability(n as u64, w as u64, theta as u64)?;
        let hits: usize = overlaps[theta..].iter().sum();
        println!(
            "  theta={theta:>2}: exact {exact:.3e}  sampled {:.3e} ({hits} of {trials})",
            hits as f64 / trials as f64
        );
    }

    // Subsampling: matching on a 10-bit subset of the stored pattern.
    let stored = sdr::random_sdr(n, w, 9)?;
    let probe = sdr::Sdr::new(n, stored.active().iter().take(10).map(|&b| b as usize))?;
    println!();
    println!(
        "10-bit subsample matches stored pattern at theta=10: {}",
        probe.matches(&stored, MatchSpec { theta: 10 })?
    );
    Ok(())
}
