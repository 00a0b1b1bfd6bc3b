//! Any two-outcome measurement on a bipartite state reduces to a pair of real
//! unit vectors whose inner product is the quantum expectation.

use corrsim::mc::trial_rng;
use corrsim::protocols::{estimate_correlation, span_coordinates, Protocol};
use corrsim::quantum::{expectation, reduce_to_vectors, DensityMatrix, Observable};

fn main() -> corrsim::Result<()> {
    let mut rng = trial_rng(42, 0);
    let rho = DensityMatrix::random(3, &mut rng);
    let a = Observable::random(3, &mut rng);
    let b = Observable::random(3, &mut rng);
    let r = reduce_to_vectors(&rho, &a, &b)?;
    println!("Tr(A⊗B ρ) = {:+.6}", expectation(&rho, &a, &b)?);
    println!(
        "<a, b>    = {:+.6}  (dimension {})",
        r.a.dot(&r.b),
        r.a.dim()
    );

    let v = span_coordinates(&[r.a.clone(), r.b.clone()])?;
    let p = Protocol::transformed(v[0].dim())?;
    let est = estimate_correlation(&p, &v[0], &v[1], 200_000, 3)?;
    println!("two-bit simulation: {:+.4} ± {:.4}", est.mean, est.stderr);
    Ok(())
}
