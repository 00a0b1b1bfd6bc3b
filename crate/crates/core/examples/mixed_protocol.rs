//! The mixed protocol sends fewer than two bits on average.

use corrsim::cli::simulate_pair;
use corrsim::corrfun::mixing_p;
use corrsim::mc::trial_rng;
use corrsim::protocols::{sample_pair_with_rho, Protocol};

fn main() -> corrsim::Result<()> {
    let p = mixing_p();
    println!(
        "mixing probability p = {p:.7}, expected bits 2 - p = {:.7}",
        2.0 - p
    );
    let mut rng = trial_rng(9, 0);
    let (a, b) = sample_pair_with_rho(3, 0.3, &mut rng)?;
    for proto in [Protocol::mixed_raw(), Protocol::mixed(3)?] {
        let s = simulate_pair(&proto, &a, &b, 300_000, 2)?;
        println!(
            "{:<10} corr {:+.4} ± {:.4}  mean bits {:.4}",
            proto.name(),
            s.mean,
            s.stderr,
            s.mean_bits
        );
    }
    Ok(())
}
