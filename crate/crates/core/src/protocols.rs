//! Two-party protocols with public coins and one-way communication.
//!
//! Alice holds `a`, Bob holds `b`, both unit vectors of the same dimension.
//! Every trial draws the shared randomness from its own counter-based stream
//! (see [`crate::mc`]); Alice's message and both outputs are deterministic
//! functions of the inputs and that stream. `sgn(0) = +1` throughout.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corrfun::{h_maj, h_nocomm, h_ort, mixing_p, CorrKind};
use crate::error::{Error, Result};
use crate::krivine::{Embedding, InverseSeries, DEFAULT_MAX_DIM};
use crate::mc::{run_trials, CorrEstimate, Tally, TrialRng};
use crate::powseries::DEFAULT_SIGN_ORDER;

const RENORMALIZE: f64 = 1e-8;

/// A unit vector, renormalized when within `1e−8` of unit length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(components: Vec<f64>) -> Result<UnitVector> {
        if components.is_empty() {
            return Err(Error::InvalidInput {
                field: "vector".into(),
                reason: "empty".into(),
            });
        }
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector(
            components.into_iter().map(|x| x / norm).collect(),
        ))
    }

    /// Normalizes any nonzero finite vector.
    pub fn from_direction(v: &[f64]) -> Result<UnitVector> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        UnitVector::new(v.iter().map(|x| x / norm).collect())
    }

    /// The standard basis vector `e_i` of `R^n`.
    pub fn basis(n: usize, i: usize) -> UnitVector {
        assert!(i < n);
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        UnitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(x, y)| x * y).sum()
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector(self.0.iter().map(|x| -x).collect())
    }

    /// `R v` for an orthogonal matrix `R`.
    pub fn rotate(&self, r: &DMatrix<f64>) -> Result<UnitVector> {
        if r.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: r.ncols(),
                got: self.dim(),
            });
        }
        UnitVector::new(
            (r * nalgebra::DVector::from_column_slice(&self.0))
                .iter()
                .copied()
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<UnitVector> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Vec<f64> {
        v.0
    }
}

#[inline]
pub fn sgn(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Alice's message: up to 64 bits, `1` for `+1` and `0` for `−1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    bits: u64,
    len: u8,
}

impl Message {
    pub fn push(&mut self, plus: bool) {
        assert!(self.len < 64, "message longer than 64 bits");
        if plus {
            self.bits |= 1 << self.len;
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit `i` as `±1`.
    pub fn sign(&self, i: usize) -> i8 {
        assert!(i < self.len());
        if self.bits >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.sign(i) > 0 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// One run: both outputs and the bits Alice sent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub alpha: i8,
    pub beta: i8,
    pub message: Message,
}

/// Alice sends `α₀α_i` for `i ≥ 1` and outputs `α₀ = sgn(Ga)₀`; Bob outputs
/// `sgn⟨Gb, (1, c₁, …, c_k)⟩`.
pub(crate) fn orthant_outputs(ga: &[f64], gb: &[f64]) -> Transcript {
    let alpha = sgn(ga[0]);
    let mut message = Message::default();
    let mut s = gb[0];
    for i in 1..ga.len() {
        let c = alpha * sgn(ga[i]);
        message.push(c > 0);
        s += f64::from(c) * gb[i];
    }
    Transcript {
        alpha,
        beta: sgn(s),
        message,
    }
}

/// `(⟨g, a⟩, ⟨g, b⟩)` for a fresh standard Gaussian vector `g`.
#[inline]
fn gaussian_projections(a: &[f64], b: &[f64], rng: &mut TrialRng) -> (f64, f64) {
    let (mut sa, mut sb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let g: f64 = StandardNormal.sample(rng);
        sa += g * x;
        sb += g * y;
    }
    (sa, sb)
}

fn orthant_trial(k: usize, a: &[f64], b: &[f64], rng: &mut TrialRng) -> Transcript {
    let mut ga = [0.0; 64];
    let mut gb = [0.0; 64];
    for i in 0..=k {
        (ga[i], gb[i]) = gaussian_projections(a, b, rng);
    }
    orthant_outputs(&ga[..=k], &gb[..=k])
}

fn majority_trial(k: usize, a: &[f64], b: &[f64], rng: &mut TrialRng) -> Transcript {
    let mut message = Message::default();
    let (ga, gb) = gaussian_projections(a, b, rng);
    let alpha = sgn(ga);
    let mut votes = i32::from(sgn(gb));
    for _ in 0..k {
        let (ga, gb) = gaussian_projections(a, b, rng);
        let c = alpha * sgn(ga);
        message.push(c > 0);
        votes += i32::from(c * sgn(gb));
    }
    Transcript {
        alpha,
        beta: if votes > 0 { 1 } else { -1 },
        message,
    }
}

/// A protocol with its fixed configuration.
#[derive(Clone, Debug)]
pub enum Protocol {
    /// Shared random hyperplane, no communication.
    NoComm,
    /// `k + 1` shared hyperplanes; Bob outputs a majority vote.
    Majority { k: usize },
    /// Shared `(k+1) × n` Gaussian matrix; Alice sends her orthant.
    Orthant { k: usize },
    /// The 1-bit orthant protocol with probability `p`, else the 2-bit one.
    MixedOrthant { p: f64 },
    /// `base` run on embedded inputs.
    Transformed {
        base: Box<Protocol>,
        embedding: Arc<Embedding>,
    },
    /// Both parties output `+1`.
    Constant,
}

impl Protocol {
    pub fn majority(k: usize) -> Result<Protocol> {
        if k % 2 == 1 {
            return Err(Error::OddMajority(k));
        }
        Ok(Protocol::Majority { k })
    }

    pub fn orthant(k: usize) -> Result<Protocol> {
        if k >= 64 {
            return Err(Error::Unsupported(format!("orthant k = {k}")));
        }
        Ok(Protocol::Orthant { k })
    }

    pub fn mixed_raw() -> Protocol {
        Protocol::MixedOrthant { p: mixing_p() }
    }

    /// The two-bit protocol: the k = 2 orthant protocol on inputs embedded by
    /// the inverse of its correlation function, with the default budget.
    pub fn transformed(n: usize) -> Result<Protocol> {
        let f = InverseSeries::from_kind(CorrKind::Orthant(2), DEFAULT_SIGN_ORDER)?;
        let e = Embedding::with_budget(&f, n, DEFAULT_MAX_DIM)?;
        Ok(Protocol::transformed_with(Protocol::Orthant { k: 2 }, e))
    }

    /// The mixed protocol on inputs embedded by the inverse of its correlation
    /// function, with the default budget.
    pub fn mixed(n: usize) -> Result<Protocol> {
        let f = InverseSeries::from_kind(CorrKind::Mixed, DEFAULT_SIGN_ORDER)?;
        let e = Embedding::with_budget(&f, n, DEFAULT_MAX_DIM)?;
        Ok(Protocol::transformed_with(Protocol::mixed_raw(), e))
    }

    pub fn transformed_with(base: Protocol, embedding: Embedding) -> Protocol {
        Protocol::Transformed {
            base: Box::new(base),
            embedding: Arc::new(embedding),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Protocol::NoComm => "nocomm".into(),
            Protocol::Majority { k } => format!("maj{k}"),
            Protocol::Orthant { k } => format!("ort{k}"),
            Protocol::MixedOrthant { .. } => "mixed-raw".into(),
            Protocol::Transformed { base, .. } => match **base {
                Protocol::MixedOrthant { .. } => "mixed".into(),
                Protocol::Orthant { k: 2 } => "transformed".into(),
                ref other => format!("transformed-{}", other.name()),
            },
            Protocol::Constant => "constant".into(),
        }
    }

    /// Worst-case message length.
    pub fn max_bits(&self) -> usize {
        match self {
            Protocol::NoComm | Protocol::Constant => 0,
            Protocol::Majority { k } | Protocol::Orthant { k } => *k,
            Protocol::MixedOrthant { .. } => 2,
            Protocol::Transformed { base, .. } => base.max_bits(),
        }
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        match self {
            Protocol::Transformed { embedding, .. } => Some(embedding),
            _ => None,
        }
    }

    /// Expected `αβ` at inner product `ρ`. For an embedded protocol this is
    /// the base correlation at the truncated embedding's inner product.
    pub fn correlation(&self, rho: f64) -> Result<f64> {
        match self {
            Protocol::NoComm => h_nocomm(rho),
            Protocol::Majority { k } => h_maj(*k, rho),
            Protocol::Orthant { k } => h_ort(*k, rho),
            Protocol::MixedOrthant { p } => Ok(p * h_ort(1, rho)? + (1.0 - p) * h_ort(2, rho)?),
            Protocol::Transformed { base, embedding } => {
                let r = embedding.inner_product_map(crate::corrfun::check_rho(rho)?);
                base.correlation(r.clamp(-1.0, 1.0))
            }
            Protocol::Constant => Ok(1.0),
        }
    }

    /// Bound on `|correlation(ρ) − ρ|` for embedded protocols; `None` otherwise.
    pub fn declared_bias(&self) -> Option<f64> {
        self.embedding().map(|e| 2.0 * e.tail_mass())
    }

    /// A party's local preprocessing of its input.
    pub fn prepare(&self, v: &UnitVector) -> Result<Vec<f64>> {
        match self {
            Protocol::Transformed { embedding, .. } => embedding.embed(v),
            _ => Ok(v.as_slice().to_vec()),
        }
    }

    /// One trial on prepared inputs.
    pub fn run_prepared(&self, a: &[f64], b: &[f64], rng: &mut TrialRng) -> Transcript {
        match self {
            Protocol::NoComm => majority_trial(0, a, b, rng),
            Protocol::Majority { k } => majority_trial(*k, a, b, rng),
            Protocol::Orthant { k } => orthant_trial(*k, a, b, rng),
            Protocol::MixedOrthant { p } => {
                let k = if rng.random::<f64>() < *p { 1 } else { 2 };
                orthant_trial(k, a, b, rng)
            }
            Protocol::Transformed { base, .. } => base.run_prepared(a, b, rng),
            Protocol::Constant => Transcript {
                alpha: 1,
                beta: 1,
                message: Message::default(),
            },
        }
    }

    pub fn run(&self, a: &UnitVector, b: &UnitVector, rng: &mut TrialRng) -> Result<Transcript> {
        check_dims(a, b)?;
        Ok(self.run_prepared(&self.prepare(a)?, &self.prepare(b)?, rng))
    }
}

fn check_dims(a: &UnitVector, b: &UnitVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

pub fn run_nocomm(a: &UnitVector, b: &UnitVector, rng: &mut TrialRng) -> Result<Transcript> {
    Protocol::NoComm.run(a, b, rng)
}

pub fn run_majority(
    k: usize,
    a: &UnitVector,
    b: &UnitVector,
    rng: &mut TrialRng,
) -> Result<Transcript> {
    Protocol::majority(k)?.run(a, b, rng)
}

pub fn run_orthant(
    k: usize,
    a: &UnitVector,
    b: &UnitVector,
    rng: &mut TrialRng,
) -> Result<Transcript> {
    Protocol::orthant(k)?.run(a, b, rng)
}

/// The k = 2 orthant protocol on `e(a)`, `e(b)`.
pub fn run_transformed(
    a: &UnitVector,
    b: &UnitVector,
    e: &Embedding,
    rng: &mut TrialRng,
) -> Result<Transcript> {
    check_dims(a, b)?;
    Ok(orthant_trial(2, &e.embed(a)?, &e.embed(b)?, rng))
}

/// The mixed protocol on `e(a)`, `e(b)`.
pub fn run_mixed(
    a: &UnitVector,
    b: &UnitVector,
    e: &Embedding,
    rng: &mut TrialRng,
) -> Result<Transcript> {
    check_dims(a, b)?;
    Ok(Protocol::mixed_raw().run_prepared(&e.embed(a)?, &e.embed(b)?, rng))
}

/// Per-input-pair tallies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub rho: f64,
    pub estimate: CorrEstimate,
    pub alpha_plus: u64,
    pub beta_plus: u64,
}

impl PairStats {
    /// Empirical `Pr[α = +1]`, `Pr[β = +1]`.
    pub fn marginals(&self) -> (f64, f64) {
        let n = self.estimate.trials as f64;
        (self.alpha_plus as f64 / n, self.beta_plus as f64 / n)
    }
}

/// Everything one simulation run records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub protocol: String,
    pub trials: u64,
    pub seed: u64,
    pub pairs: Vec<PairStats>,
    pub mean_bits: f64,
    pub max_bits: usize,
    /// Message string → count, over all trials.
    pub transcripts: BTreeMap<String, u64>,
}

impl SimReport {
    /// Largest transcript frequency and its binomial standard error.
    pub fn max_transcript_frequency(&self) -> (f64, f64) {
        let top = self.transcripts.values().copied().max().unwrap_or(0);
        let n = self.trials as f64;
        let p = top as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

#[derive(Default)]
struct SimTally {
    pairs: Vec<[u64; 4]>,
    sums: Vec<i64>,
    bits: u64,
    max_bits: usize,
    messages: BTreeMap<Message, u64>,
}

impl Tally for SimTally {
    fn merge(&mut self, other: Self) {
        if self.pairs.is_empty() {
            self.pairs = other.pairs;
            self.sums = other.sums;
        } else {
            for (x, y) in self.pairs.iter_mut().zip(&other.pairs) {
                for j in 0..4 {
                    x[j] += y[j];
                }
            }
            for (x, y) in self.sums.iter_mut().zip(&other.sums) {
                *x += y;
            }
        }
        self.bits += other.bits;
        self.max_bits = self.max_bits.max(other.max_bits);
        for (m, c) in other.messages {
            *self.messages.entry(m).or_insert(0) += c;
        }
    }
}

/// Runs `trials` trials, cycling through `pairs` (trial `t` uses pair
/// `t mod pairs.len()`). Inputs are prepared once per pair.
pub fn simulate(
    protocol: &Protocol,
    pairs: &[(UnitVector, UnitVector)],
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if pairs.is_empty() || trials < pairs.len() as u64 {
        return Err(Error::InvalidInput {
            field: "trials".into(),
            reason: "need at least one trial per input pair".into(),
        });
    }
    let prepared = pairs
        .iter()
        .map(|(a, b)| {
            check_dims(a, b)?;
            Ok((protocol.prepare(a)?, protocol.prepare(b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = pairs.len() as u64;
    let tally = run_trials(trials, seed, |acc: &mut SimTally, t, rng| {
        if acc.pairs.is_empty() {
            acc.pairs = vec![[0; 4]; prepared.len()];
            acc.sums = vec![0; prepared.len()];
        }
        let idx = (t % m) as usize;
        let (a, b) = &prepared[idx];
        let tr = protocol.run_prepared(a, b, rng);
        acc.sums[idx] += i64::from(tr.alpha * tr.beta);
        let slot = &mut acc.pairs[idx];
        slot[0] += 1;
        slot[1] += u64::from(tr.alpha > 0);
        slot[2] += u64::from(tr.beta > 0);
        acc.bits += tr.message.len() as u64;
        acc.max_bits = acc.max_bits.max(tr.message.len());
        *acc.messages.entry(tr.message).or_insert(0) += 1;
    });
    let pair_stats = pairs
        .iter()
        .enumerate()
        .map(|(i, (a, b))| PairStats {
            rho: a.dot(b),
            estimate: CorrEstimate::from_sum(tally.sums[i], tally.pairs[i][0]),
            alpha_plus: tally.pairs[i][1],
            beta_plus: tally.pairs[i][2],
        })
        .collect();
    Ok(SimReport {
        protocol: protocol.name(),
        trials,
        seed,
        pairs: pair_stats,
        mean_bits: tally.bits as f64 / trials as f64,
        max_bits: tally.max_bits,
        transcripts: tally
            .messages
            .into_iter()
            .map(|(m, c)| (m.to_string(), c))
            .collect(),
    })
}

/// Monte Carlo estimate of `E[αβ]` on one input pair.
pub fn estimate_correlation(
    protocol: &Protocol,
    a: &UnitVector,
    b: &UnitVector,
    trials: u64,
    seed: u64,
) -> Result<CorrEstimate> {
    let report = simulate(protocol, &[(a.clone(), b.clone())], trials, seed)?;
    Ok(report.pairs[0].estimate)
}

/// Transcript frequencies over a uniform distribution on `pairs`.
pub fn transcript_stats(
    protocol: &Protocol,
    pairs: &[(UnitVector, UnitVector)],
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<String, u64>> {
    Ok(simulate(protocol, pairs, trials, seed)?.transcripts)
}

/// Uniform point on the unit sphere of `R^n`.
pub fn sample_unit_vector(n: usize, rng: &mut impl Rng) -> Result<UnitVector> {
    if n == 0 {
        return Err(Error::InvalidInput {
            field: "n".into(),
            reason: "dimension must be positive".into(),
        });
    }
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return UnitVector::new(g.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// A uniformly oriented pair with `⟨a, b⟩ = ρ`.
pub fn sample_pair_with_rho(
    n: usize,
    rho: f64,
    rng: &mut impl Rng,
) -> Result<(UnitVector, UnitVector)> {
    if n < 2 {
        return Err(Error::InvalidInput {
            field: "n".into(),
            reason: "pairs need n >= 2".into(),
        });
    }
    let rho = crate::corrfun::check_rho(rho)?;
    let a = sample_unit_vector(n, rng)?;
    let perp = loop {
        let g = sample_unit_vector(n, rng)?;
        let proj = g.dot(&a);
        let w: Vec<f64> = g.0.iter().zip(&a.0).map(|(x, y)| x - proj * y).collect();
        if let Ok(u) = UnitVector::from_direction(&w) {
            if w.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                break u;
            }
        }
    };
    let s = (1.0 - rho * rho).sqrt();
    let b: Vec<f64> =
        a.0.iter()
            .zip(&perp.0)
            .map(|(x, y)| rho * x + s * y)
            .collect();
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    // `b` is exactly `a` at ρ = 1; otherwise correct the last ulp of the norm
    let b = if rho.abs() == 1.0 {
        b
    } else {
        b.into_iter().map(|x| x / norm).collect()
    };
    Ok((a, UnitVector(b)))
}

/// Haar-random orthogonal `n × n` matrix.
pub fn random_rotation(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Coordinates of `vectors` in an orthonormal basis of their span. Inner
/// products are preserved, the dimension drops to the rank of the set.
pub fn span_coordinates(vectors: &[UnitVector]) -> Result<Vec<UnitVector>> {
    let n = vectors.first().map_or(0, UnitVector::dim);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if v.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.dim(),
            });
        }
        let mut w = v.0.clone();
        for _ in 0..2 {
            for e in &basis {
                let p: f64 = w.iter().zip(e).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(e).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    vectors
        .iter()
        .map(|v| {
            UnitVector::new(
                basis
                    .iter()
                    .map(|e| e.iter().zip(&v.0).map(|(x, y)| x * y).sum())
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::trial_rng;
    use std::f64::consts::PI;

    fn pair(rho: f64) -> (UnitVector, UnitVector) {
        sample_pair_with_rho(3, rho, &mut trial_rng(99, 0)).unwrap()
    }

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector::new(vec![1.0 + 5e-9, 0.0]).is_ok());
        assert!(matches!(
            UnitVector::new(vec![1.1, 0.0]),
            Err(Error::NotUnit { .. })
        ));
        let v = UnitVector::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), "[0.6,0.8]");
    }

    #[test]
    fn message_strings() {
        let mut m = Message::default();
        m.push(true);
        m.push(false);
        assert_eq!(m.to_string(), "10");
        assert_eq!(m.len(), 2);
        assert_eq!(Message::default().to_string(), "");
    }

    #[test]
    fn pair_sampling() {
        let mut rng = trial_rng(4, 4);
        for rho in [-1.0, -0.4, 0.0, 0.7, 1.0] {
            let (a, b) = sample_pair_with_rho(5, rho, &mut rng).unwrap();
            assert!((a.dot(&b) - rho).abs() < 1e-12);
            if rho == 1.0 {
                assert_eq!(a, b);
            }
        }
        assert!(sample_pair_with_rho(1, 0.2, &mut rng).is_err());
        assert!(sample_pair_with_rho(3, 1.2, &mut rng).is_err());
    }

    #[test]
    fn identical_and_opposite_inputs() {
        let (a, _) = pair(0.0);
        let protocols = [
            Protocol::NoComm,
            Protocol::majority(4).unwrap(),
            Protocol::orthant(2).unwrap(),
            Protocol::mixed_raw(),
        ];
        for p in &protocols {
            let same = estimate_correlation(p, &a, &a, 2000, 1).unwrap();
            assert_eq!(same.mean, 1.0, "{}", p.name());
        }
        let opp = estimate_correlation(&Protocol::NoComm, &a, &a.neg(), 2000, 1).unwrap();
        assert_eq!(opp.mean, -1.0);
    }

    #[test]
    fn message_lengths() {
        let (a, b) = pair(0.3);
        for (p, bits) in [
            (Protocol::NoComm, 0),
            (Protocol::majority(2).unwrap(), 2),
            (Protocol::orthant(1).unwrap(), 1),
            (Protocol::orthant(2).unwrap(), 2),
        ] {
            let r = simulate(&p, &[(a.clone(), b.clone())], 1000, 0).unwrap();
            assert_eq!(r.max_bits, bits);
            assert_eq!(r.mean_bits, bits as f64);
        }
        assert!(Protocol::majority(3).is_err());
    }

    #[test]
    fn one_trial_convention() {
        let (a, b) = pair(0.2);
        let e = estimate_correlation(&Protocol::NoComm, &a, &b, 1, 5).unwrap();
        assert!(e.mean == 1.0 || e.mean == -1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn nocomm_half() {
        let (a, b) = pair(0.5);
        let e = estimate_correlation(&Protocol::NoComm, &a, &b, 200_000, 3).unwrap();
        assert!(e.agrees_with(1.0 / 3.0, 4.0, 0.0));
        let k1 = estimate_correlation(&Protocol::orthant(1).unwrap(), &a, &b, 200_000, 3).unwrap();
        assert!(k1.agrees_with(4.0 / PI * (0.5 / 2f64.sqrt()).asin(), 4.0, 0.0));
    }

    #[test]
    fn rotation_and_span_preserve_inner_products() {
        let mut rng = trial_rng(8, 0);
        let r = random_rotation(4, &mut rng);
        assert!(
            (r.transpose() * &r - DMatrix::<f64>::identity(4, 4))
                .abs()
                .max()
                < 1e-12
        );
        let (a, b) = sample_pair_with_rho(4, 0.3, &mut rng).unwrap();
        let (ra, rb) = (a.rotate(&r).unwrap(), b.rotate(&r).unwrap());
        assert!((ra.dot(&rb) - 0.3).abs() < 1e-12);
        let c = span_coordinates(&[a, b]).unwrap();
        assert_eq!(c[0].dim(), 2);
        assert!((c[0].dot(&c[1]) - 0.3).abs() < 1e-12);
    }
}
