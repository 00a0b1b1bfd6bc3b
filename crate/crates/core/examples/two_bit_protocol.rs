//! Two bits of communication reproduce the correlation ⟨a, b⟩.

use corrsim::cli::simulate_pair;
use corrsim::mc::trial_rng;
use corrsim::protocols::{sample_pair_with_rho, Protocol};

fn main() -> corrsim::Result<()> {
    let p = Protocol::transformed(3)?;
    let mut rng = trial_rng(5, 0);
    for rho in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let (a, b) = sample_pair_with_rho(3, rho, &mut rng)?;
        let s = simulate_pair(&p, &a, &b, 200_000, 11)?;
        println!(
            "rho {rho:+.1}: estimate {:+.4} ± {:.4}, bits {}",
            s.mean, s.stderr, s.mean_bits
        );
    }
    Ok(())
}
