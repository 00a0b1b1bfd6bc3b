//! Quantities behind the communication lower bounds: how fast the one-bit
//! orthant correlation leaves ±1, and how evenly the two-bit transcripts are
//! spread on CHSH inputs.

use corrsim::cli::{bneps, transcript_experiment};
use corrsim::protocols::Protocol;

fn main() -> corrsim::Result<()> {
    let report = bneps(1, 3, &[0.1, 0.01, 0.001], 200_000, 4)?;
    for row in &report.rows {
        println!(
            "eps {:<6} B = {:.6} (mc {:.6} ± {:.6}), ratio to 8eps/pi {:.4}",
            row.epsilon, row.analytic, row.mc, row.mc_stderr, row.ratio
        );
    }
    let t = transcript_experiment(&Protocol::transformed(2)?, 200_000, 5)?;
    println!("transcripts: {:?}", t.transcripts);
    println!(
        "max frequency {:.4} ± {:.4} (bound {:.4})",
        t.max_frequency, t.stderr, t.bound
    );
    Ok(())
}
