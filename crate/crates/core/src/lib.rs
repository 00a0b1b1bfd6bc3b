//! Classical protocols that reproduce quantum two-outcome correlations with
//! shared randomness and at most two bits of one-way communication.

pub mod cli;
pub mod corrfun;
pub mod error;
pub mod geom;
pub mod krivine;
pub mod mc;
pub mod powseries;
pub mod protocols;
pub mod quad;
pub mod quantum;

pub use error::{Error, Result};
