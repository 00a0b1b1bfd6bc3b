//! Analytic correlation curves next to Monte Carlo estimates for the
//! one-sided protocols. Prints CSV per protocol.

use corrsim::cli::{curve_csv, curve_rows};
use corrsim::protocols::Protocol;

fn main() -> corrsim::Result<()> {
    let protocols = [
        Protocol::NoComm,
        Protocol::majority(2)?,
        Protocol::orthant(1)?,
        Protocol::orthant(2)?,
        Protocol::mixed_raw(),
    ];
    for p in &protocols {
        println!("# {}", p.name());
        print!("{}", curve_csv(&curve_rows(p, 3, 11, 100_000, 7)?));
    }
    Ok(())
}
