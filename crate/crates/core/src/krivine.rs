//! Inverting a correlation function and embedding vectors so that inner
//! products are remapped by the inverse.
//!
//! If `h(ρ) = Σ c_k ρ^k` is the correlation function of a base protocol and
//! `f = h⁻¹ = Σ d_k x^k` has nonnegative coefficients summing to one, then
//! `C(v) = ⊕_k √d_k · v^{⊗k}` maps unit vectors to unit vectors with
//! `⟨C(a), C(b)⟩ = f(⟨a, b⟩)`. Running the base protocol on `C(a), C(b)`
//! therefore yields correlation exactly `⟨a, b⟩`.
//!
//! Only finitely many degrees can be kept. The weight `τ = 1 − Σ_{k ≤ K} d_k`
//! that is dropped is folded into the top retained odd degree, so embedded
//! vectors stay exactly unit, the map stays odd, `±1 ↦ ±1` exactly, and
//! `|⟨C(a), C(b)⟩ − f(ρ)| ≤ τ·|ρ|^K`.

use rand_distr::{Distribution, StandardNormal};

use crate::corrfun::{CorrKind, CorrelationFunction};
use crate::error::{Error, Result};
use crate::mc::{run_trials, CorrEstimate, Tally};
use crate::powseries::{Parity, Series};
use crate::protocols::{orthant_outputs, UnitVector};

/// Hard cap on the number of coordinates an embedding may allocate.
pub const MAX_EMBED_DIM: usize = 1 << 22;

/// Coordinate budget used when no explicit truncation degree is requested.
pub const DEFAULT_MAX_DIM: usize = 256;

const POSITIVITY_SLACK: f64 = 1e-15;
const BOUND_SLACK: f64 = 1e-12;
const MASS_SLACK: f64 = 1e-9;

/// The compositional inverse `f = h⁻¹` of a correlation function.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseSeries {
    d: Series,
    source: Option<CorrKind>,
}

/// Reverts `h` and enforces `d_k ≥ 0`, `d_k ≤ 1/k` and `Σ d_k ≤ 1`.
pub fn invert_h(h: &Series, order: usize) -> Result<InverseSeries> {
    if h.parity() != Parity::Odd {
        return Err(Error::Parity {
            degree: 0,
            value: h.coeff(0),
        });
    }
    if !(h.coeff(1) > 0.0) {
        return Err(Error::ZeroLinear);
    }
    let inv = InverseSeries::unchecked(h.revert(order)?, None);
    inv.check()?;
    Ok(inv)
}

impl InverseSeries {
    /// Wraps a series without running the coefficient checks.
    pub fn unchecked(d: Series, source: Option<CorrKind>) -> InverseSeries {
        InverseSeries { d, source }
    }

    /// Inverse of a named correlation function, with checks.
    pub fn from_kind(kind: CorrKind, order: usize) -> Result<InverseSeries> {
        let h = CorrelationFunction::new(kind)?.series(order)?;
        let mut inv = invert_h(&h, order)?;
        inv.source = Some(kind);
        Ok(inv)
    }

    pub fn d(&self) -> &Series {
        &self.d
    }

    pub fn source(&self) -> Option<CorrKind> {
        self.source
    }

    pub fn order(&self) -> usize {
        self.d.max_order()
    }

    /// `Σ_{k ≤ K} d_k`.
    pub fn partial_mass(&self, degree: usize) -> f64 {
        self.d.coeffs().iter().take(degree + 1).sum()
    }

    /// `1 − Σ_{k ≤ K} d_k`, floored at zero.
    pub fn tail_mass(&self, degree: usize) -> f64 {
        (1.0 - self.partial_mass(degree)).max(0.0)
    }

    /// Coefficient sign and size checks; the first violation is returned.
    pub fn check(&self) -> Result<()> {
        let mut mass = 0.0;
        for (k, &dk) in self.d.coeffs().iter().enumerate() {
            if k == 0 {
                if dk != 0.0 {
                    return Err(Error::NonzeroConstant(dk));
                }
                continue;
            }
            if dk < -POSITIVITY_SLACK {
                return Err(Error::SignViolation {
                    degree: k,
                    value: dk,
                    claim: "d_k >= 0",
                });
            }
            let upper = 1.0 / k as f64 + BOUND_SLACK;
            if dk > upper {
                return Err(Error::InverseBound {
                    degree: k,
                    value: dk,
                    lower: -POSITIVITY_SLACK,
                    upper,
                });
            }
            mass += dk;
            if mass > 1.0 + MASS_SLACK {
                return Err(Error::InverseBound {
                    degree: k,
                    value: mass,
                    lower: 0.0,
                    upper: 1.0 + MASS_SLACK,
                });
            }
        }
        Ok(())
    }

    /// `(degree, d_k, 1/k − d_k)` for every odd degree.
    pub fn bound_margins(&self) -> Vec<(usize, f64, f64)> {
        (1..=self.order())
            .step_by(2)
            .map(|k| {
                let dk = self.d.coeff(k);
                (k, dk, 1.0 / k as f64 - dk)
            })
            .collect()
    }

    /// Truncated series value.
    pub fn eval(&self, x: f64) -> f64 {
        self.d.eval(x)
    }

    /// `f(x)` to machine precision: numerical inversion of the source
    /// correlation function when known, otherwise the truncated series.
    pub fn exact(&self, x: f64) -> Result<f64> {
        let y = match self.source {
            Some(kind) => CorrelationFunction::new(kind)?.invert(x)?,
            None => self.eval(x),
        };
        if y.abs() > 1.0 + 1e-12 || !y.is_finite() {
            return Err(Error::Precision(format!("f({x}) = {y} outside [-1, 1]")));
        }
        Ok(y.clamp(-1.0, 1.0))
    }
}

/// How the degree-`k` tensor power is stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Full Kronecker power, `n^k` coordinates.
    Tensor,
    /// One coordinate per monomial, weighted by `√multinomial`; `C(n+k−1, k)`
    /// coordinates with identical inner products.
    Symmetric,
}

#[derive(Clone, Debug, PartialEq)]
struct Block {
    degree: usize,
    scale: f64,
    /// Symmetric layout: exponent vectors and their `√multinomial` weights.
    monomials: Vec<(Vec<u16>, f64)>,
    dim: usize,
}

/// The finite embedding `v ↦ ⊕_{k ≤ K} w_k v^{⊗k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    n: usize,
    truncation: usize,
    tail_mass: f64,
    layout: Layout,
    blocks: Vec<Block>,
    dim: usize,
}

fn block_dim(n: usize, k: usize, layout: Layout) -> Option<usize> {
    match layout {
        Layout::Tensor => n.checked_pow(k as u32),
        Layout::Symmetric => {
            // C(n + k − 1, k)
            let mut c: u128 = 1;
            for i in 0..k as u128 {
                c = c.checked_mul(n as u128 + i)? / (i + 1);
            }
            usize::try_from(c).ok()
        }
    }
}

fn exponent_vectors(n: usize, k: usize) -> Vec<Vec<u16>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if prefix.len() == n - 1 {
            prefix.push(left as u16);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u16);
            rec(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

fn sqrt_multinomial(k: usize, exps: &[u16]) -> f64 {
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let ln = ln_fact(k) - exps.iter().map(|&e| ln_fact(e as usize)).sum::<f64>();
    (0.5 * ln).exp()
}

impl Embedding {
    /// Embedding of `R^n` keeping degrees up to `truncation`.
    pub fn new(
        f: &InverseSeries,
        n: usize,
        truncation: usize,
        layout: Layout,
    ) -> Result<Embedding> {
        if n == 0 {
            return Err(Error::InvalidInput {
                field: "n".into(),
                reason: "dimension must be positive".into(),
            });
        }
        if truncation == 0 || truncation > f.order() {
            return Err(Error::InvalidInput {
                field: "truncation".into(),
                reason: format!("must lie in 1..={}", f.order()),
            });
        }
        let mass = f.partial_mass(truncation);
        if mass > 1.0 + MASS_SLACK {
            return Err(Error::Precision(format!("partial mass {mass} exceeds 1")));
        }
        let tail_mass = (1.0 - mass).max(0.0);
        let fold = match f.d().parity() {
            Parity::Odd if truncation % 2 == 0 => truncation - 1,
            _ => truncation,
        };

        let mut blocks = Vec::new();
        let mut dim = 0usize;
        for k in 1..=truncation {
            let mut weight = f.d().coeff(k).max(0.0);
            if k == fold {
                weight += tail_mass;
            }
            if weight == 0.0 {
                continue;
            }
            let bd = block_dim(n, k, layout)
                .filter(|&d| d <= MAX_EMBED_DIM)
                .ok_or(Error::EmbeddingTooLarge {
                    dim: usize::MAX,
                    limit: MAX_EMBED_DIM,
                })?;
            dim += bd;
            if dim > MAX_EMBED_DIM {
                return Err(Error::EmbeddingTooLarge {
                    dim,
                    limit: MAX_EMBED_DIM,
                });
            }
            let monomials = match layout {
                Layout::Tensor => Vec::new(),
                Layout::Symmetric => exponent_vectors(n, k)
                    .into_iter()
                    .map(|e| {
                        let w = sqrt_multinomial(k, &e);
                        (e, w)
                    })
                    .collect(),
            };
            blocks.push(Block {
                degree: k,
                scale: weight.sqrt(),
                monomials,
                dim: bd,
            });
        }
        Ok(Embedding {
            n,
            truncation,
            tail_mass,
            layout,
            blocks,
            dim,
        })
    }

    /// Largest odd truncation whose symmetric embedding fits in `max_dim`
    /// coordinates (degree 1 is always allowed).
    pub fn with_budget(f: &InverseSeries, n: usize, max_dim: usize) -> Result<Embedding> {
        let mut best = Embedding::new(f, n, 1, Layout::Symmetric)?;
        let mut k = 3;
        while k <= f.order() {
            let e = Embedding::new(f, n, k, Layout::Symmetric)?;
            if e.dim > max_dim {
                break;
            }
            best = e;
            k += 2;
        }
        Ok(best)
    }

    pub fn source_dim(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(degree, w_k)` for every nonzero block; `Σ w_k² = 1`.
    pub fn scales(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.blocks.iter().map(|b| (b.degree, b.scale))
    }

    /// `⟨C(a), C(b)⟩` as a function of `⟨a, b⟩`.
    pub fn inner_product_map(&self, rho: f64) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.scale * b.scale * rho.powi(b.degree as i32))
            .sum()
    }

    pub fn embed(&self, v: &UnitVector) -> Result<Vec<f64>> {
        if v.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.dim(),
            });
        }
        let v = v.as_slice();
        let mut out = Vec::with_capacity(self.dim);
        match self.layout {
            Layout::Tensor => {
                let mut power = vec![1.0];
                let mut degree = 0;
                for b in &self.blocks {
                    while degree < b.degree {
                        power = power
                            .iter()
                            .flat_map(|x| v.iter().map(move |y| x * y))
                            .collect();
                        degree += 1;
                    }
                    out.extend(power.iter().map(|x| b.scale * x));
                }
            }
            Layout::Symmetric => {
                let top = self.blocks.last().map_or(0, |b| b.degree);
                let pows: Vec<Vec<f64>> = v
                    .iter()
                    .map(|&x| {
                        let mut p = Vec::with_capacity(top + 1);
                        let mut acc = 1.0;
                        for _ in 0..=top {
                            p.push(acc);
                            acc *= x;
                        }
                        p
                    })
                    .collect();
                for b in &self.blocks {
                    for (exps, w) in &b.monomials {
                        let m: f64 = exps
                            .iter()
                            .zip(&pows)
                            .map(|(&e, p)| p[e as usize])
                            .product();
                        out.push(b.scale * w * m);
                    }
                }
            }
        }
        debug_assert_eq!(out.len(), self.dim);
        debug_assert!(self.blocks.iter().map(|b| b.dim).sum::<usize>() == self.dim);
        Ok(out)
    }
}

#[derive(Default)]
struct ProductSum(i64);

impl Tally for ProductSum {
    fn merge(&mut self, other: Self) {
        self.0 += other.0;
    }
}

/// The `k`-bit orthant protocol run on `C(a), C(b)` for an idealized,
/// untruncated embedding. Only the joint law of `(G C(a), G C(b))` matters:
/// `k + 1` independent standard bivariate normal pairs with correlation
/// `f(ρ)`, which are sampled directly.
pub fn exact_corr_oracle(
    rho: f64,
    f: &InverseSeries,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<CorrEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput {
            field: "trials".into(),
            reason: "must be positive".into(),
        });
    }
    if k >= 8 {
        return Err(Error::Unsupported(format!("oracle with k = {k}")));
    }
    let r = f.exact(crate::corrfun::check_rho(rho)?)?;
    let s = (1.0 - r * r).max(0.0).sqrt();
    let sum = run_trials(trials, seed, |acc: &mut ProductSum, _, rng| {
        let rows = k + 1;
        let (mut ga, mut gb) = ([0.0; 8], [0.0; 8]);
        for i in 0..rows {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            ga[i] = z1;
            gb[i] = r * z1 + s * z2;
        }
        let t = orthant_outputs(&ga[..rows], &gb[..rows]);
        acc.0 += (t.alpha * t.beta) as i64;
    });
    Ok(CorrEstimate::from_sum(sum.0, trials))
}
