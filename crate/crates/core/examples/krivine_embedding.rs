//! Builds the inverse-series embedding and shows how the inner product of
//! embedded vectors maps back through the correlation function.

use corrsim::corrfun::{h_ort, CorrKind};
use corrsim::krivine::{Embedding, InverseSeries, Layout};
use corrsim::mc::trial_rng;
use corrsim::protocols::sample_pair_with_rho;

fn main() -> corrsim::Result<()> {
    let f = InverseSeries::from_kind(CorrKind::Orthant(2), 61)?;
    println!("d_1..d_11: {:?}", &f.d().coeffs()[1..12]);
    println!("tail mass beyond 61: {:.5}", f.tail_mass(61));

    let mut rng = trial_rng(1, 0);
    let (a, b) = sample_pair_with_rho(3, 0.6, &mut rng)?;
    for k in [5, 11, 21] {
        let e = Embedding::new(&f, 3, k, Layout::Symmetric)?;
        let (ea, eb) = (e.embed(&a)?, e.embed(&b)?);
        let ip: f64 = ea.iter().zip(&eb).map(|(x, y)| x * y).sum();
        println!(
            "K={k:>2} dim={:>5} tail={:.4}  <a',b'>={ip:.5}  h(<a',b'>)={:.5}",
            e.dim(),
            e.tail_mass(),
            h_ort(2, ip)?
        );
    }
    Ok(())
}
