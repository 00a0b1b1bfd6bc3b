//! Counter-based random streams and deterministic parallel trial loops.
//!
//! Trial `i` under master seed `s` always draws from ChaCha8 stream `i` keyed
//! by `s`, so results are identical whatever the worker count or chunking.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type TrialRng = ChaCha8Rng;

const CHUNK: u64 = 4096;

/// The random stream owned by one trial.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// An independent master seed for sub-experiment `label` (SplitMix64 mixing).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Accumulators merged across chunks. Merging must be commutative so that
/// the reduction order chosen by the thread pool cannot change the result.
pub trait Tally: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Runs `per_trial` for trial indices `0..trials` in parallel chunks.
pub fn run_trials<T, F>(trials: u64, seed: u64, per_trial: F) -> T
where
    T: Tally,
    F: Fn(&mut T, u64, &mut TrialRng) + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = T::default();
            let base = ChaCha8Rng::seed_from_u64(seed);
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = base.clone();
                rng.set_stream(i);
                per_trial(&mut acc, i, &mut rng);
            }
            acc
        })
        .reduce(T::default, |mut a, b| {
            a.merge(b);
            a
        })
}

/// Monte Carlo estimate of `E[αβ]` from ±1 products.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrEstimate {
    pub mean: f64,
    /// `√((1 − mean²)/trials)`; zero for a single trial.
    pub stderr: f64,
    pub trials: u64,
}

impl CorrEstimate {
    /// Builds the estimate from the sum of `trials` products in `{−1, +1}`.
    pub fn from_sum(sum: i64, trials: u64) -> CorrEstimate {
        assert!(trials > 0, "at least one trial");
        let mean = sum as f64 / trials as f64;
        let stderr = if trials == 1 {
            0.0
        } else {
            ((1.0 - mean * mean).max(0.0) / trials as f64).sqrt()
        };
        CorrEstimate {
            mean,
            stderr,
            trials,
        }
    }

    /// `|mean − target| ≤ sigmas·stderr + slack`.
    pub fn agrees_with(&self, target: f64, sigmas: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr + slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[derive(Default)]
    struct Sum(u64, u64);

    impl Tally for Sum {
        fn merge(&mut self, other: Self) {
            self.0 = self.0.wrapping_add(other.0);
            self.1 += other.1;
        }
    }

    #[test]
    fn streams_are_independent_of_pool_size() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    run_trials::<Sum, _>(20_000, 7, |acc, _, rng| {
                        acc.0 = acc.0.wrapping_add(rng.random::<u64>());
                        acc.1 += 1;
                    })
                })
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, 20_000);
    }

    #[test]
    fn trial_rng_matches_loop_stream() {
        let mut direct = trial_rng(11, 5000);
        let first: u64 = direct.random();
        let got = run_trials::<Sum, _>(5001, 11, |acc, i, rng| {
            if i == 5000 {
                acc.0 = rng.random();
            }
        });
        assert_eq!(got.0, first);
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let e = CorrEstimate::from_sum(-1, 1);
        assert_eq!(e.mean, -1.0);
        assert_eq!(e.stderr, 0.0);
        let e = CorrEstimate::from_sum(0, 100);
        assert!((e.stderr - 0.1).abs() < 1e-15);
    }
}
