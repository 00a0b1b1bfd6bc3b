//! Quantum correlations `Tr(A⊗B·ρ)` and their reduction to inner products of
//! real unit vectors, plus the CHSH game.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{simulate, Protocol, SimReport, UnitVector};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;
const INVOLUTION_TOL: f64 = 1e-8;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidInput {
            field: what.into(),
            reason: format!("{}x{} is not square", m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    let dev = max_abs(&(m - m.adjoint()));
    if dev > HERMITIAN_TOL {
        return Err(Error::InvalidInput {
            field: what.into(),
            reason: format!("not Hermitian (deviation {dev:.3e})"),
        });
    }
    Ok(())
}

fn local_dim(total: usize) -> Option<usize> {
    let d = (total as f64).sqrt().round() as usize;
    (d * d == total).then_some(d)
}

/// `f(H)` for Hermitian `H` through its eigendecomposition.
fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let diag = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0)));
    v * diag * v.adjoint()
}

/// A state on `C^d ⊗ C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    d: usize,
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<DensityMatrix> {
        let total = check_square(&m, "rho")?;
        let d = local_dim(total).ok_or_else(|| Error::InvalidInput {
            field: "rho".into(),
            reason: format!("size {total} is not a square d^2"),
        })?;
        check_hermitian(&m, "rho")?;
        let trace = m.trace();
        if (trace.re - 1.0).abs() > HERMITIAN_TOL || trace.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidInput {
                field: "rho".into(),
                reason: format!("trace {trace} is not 1"),
            });
        }
        let min = m.clone().symmetric_eigen().eigenvalues.min();
        if min < -HERMITIAN_TOL {
            return Err(Error::InvalidInput {
                field: "rho".into(),
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(DensityMatrix { d, m })
    }

    /// The pure state `|ψ⟩⟨ψ|` (normalized first).
    pub fn pure(psi: &[Complex64]) -> Result<DensityMatrix> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        DensityMatrix::new(&v * v.adjoint())
    }

    /// `ρ_A ⊗ ρ_B` from two single-party states.
    pub fn product(a: &CMatrix, b: &CMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(a.kronecker(b))
    }

    /// Normalized `G G†` with `G` a complex Gaussian `d² × d²` matrix.
    pub fn random(d: usize, rng: &mut impl Rng) -> DensityMatrix {
        let n = d * d;
        let g = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
        let w = &g * g.adjoint();
        let t = w.trace().re;
        let mut m = w / Complex64::new(t, 0.0);
        // exact Hermitian symmetry
        m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        DensityMatrix::new(m).expect("Wishart matrices are states")
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// `√ρ`, clamping round-off negative eigenvalues to zero.
    pub fn sqrt(&self) -> CMatrix {
        hermitian_function(&self.m, |l| l.max(0.0).sqrt())
    }
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// A Hermitian `d × d` matrix with `A² = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    m: CMatrix,
}

impl Observable {
    pub fn new(m: CMatrix) -> Result<Observable> {
        let d = check_square(&m, "observable")?;
        check_hermitian(&m, "observable")?;
        let dev = max_abs(&(&m * &m - CMatrix::identity(d, d)));
        if dev > INVOLUTION_TOL {
            return Err(Error::InvalidInput {
                field: "observable".into(),
                reason: format!("A*A differs from the identity by {dev:.3e}"),
            });
        }
        Ok(Observable { m })
    }

    pub fn from_real(d: usize, entries: &[f64]) -> Result<Observable> {
        Observable::new(CMatrix::from_row_iterator(
            d,
            d,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// `sgn(H)` for a random Hermitian `H`.
    pub fn random(d: usize, rng: &mut impl Rng) -> Observable {
        let g = CMatrix::from_fn(d, d, |_, _| complex_normal(rng));
        let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let s = hermitian_function(&h, |l| if l >= 0.0 { 1.0 } else { -1.0 });
        Observable::new((&s + s.adjoint()) * Complex64::new(0.5, 0.0))
            .expect("sign functions are involutions")
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }
}

fn check_instance(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<()> {
    for o in [a, b] {
        if o.dim() != rho.d {
            return Err(Error::DimensionMismatch {
                expected: rho.d,
                got: o.dim(),
            });
        }
    }
    Ok(())
}

/// `Tr(A⊗B·ρ)`.
pub fn expectation(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    check_instance(rho, a, b)?;
    let t = (a.m.kronecker(&b.m) * &rho.m).trace();
    if t.im.abs() > HERMITIAN_TOL {
        return Err(Error::Precision(format!(
            "expectation has imaginary part {:.3e}",
            t.im
        )));
    }
    Ok(t.re.clamp(-1.0, 1.0))
}

/// Real unit vectors with `⟨a, b⟩ = Tr(A⊗B·ρ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedVectors {
    pub a: UnitVector,
    pub b: UnitVector,
    pub expectation: f64,
}

fn stack_re_im(m: &CMatrix) -> Vec<f64> {
    let (r, c) = m.shape();
    let entries: Vec<Complex64> = (0..r)
        .flat_map(|i| (0..c).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    entries
        .iter()
        .map(|z| z.re)
        .chain(entries.iter().map(|z| z.im))
        .collect()
}

/// Stacks real then imaginary parts of every entry (row-major) of
/// `(A⊗I)√ρ` and `(I⊗B)√ρ`, giving vectors of dimension `2d⁴`.
pub fn reduce_to_vectors(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
) -> Result<ReducedVectors> {
    check_instance(rho, a, b)?;
    let d = rho.d;
    let id = CMatrix::identity(d, d);
    let root = rho.sqrt();
    let va = stack_re_im(&(a.m.kronecker(&id) * &root));
    let vb = stack_re_im(&(id.kronecker(&b.m) * &root));
    Ok(ReducedVectors {
        a: UnitVector::new(va)?,
        b: UnitVector::new(vb)?,
        expectation: expectation(rho, a, b)?,
    })
}

/// The EPR state with the optimal CHSH measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshInstance {
    pub rho: DensityMatrix,
    pub alice: [Observable; 2],
    pub bob: [Observable; 2],
}

pub fn chsh_instance() -> ChshInstance {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    let rho = DensityMatrix::pure(&[c(r), c(0.0), c(0.0), c(r)]).expect("EPR state");
    let z = [1.0, 0.0, 0.0, -1.0];
    let x = [0.0, 1.0, 1.0, 0.0];
    let plus: Vec<f64> = z.iter().zip(&x).map(|(p, q)| (p + q) * r).collect();
    let minus: Vec<f64> = z.iter().zip(&x).map(|(p, q)| (p - q) * r).collect();
    let obs = |e: &[f64]| Observable::from_real(2, e).expect("Pauli combination");
    ChshInstance {
        rho,
        alice: [obs(&z), obs(&x)],
        bob: [obs(&plus), obs(&minus)],
    }
}

/// `αβ` must equal this sign to win on input `(i, j)`.
pub fn chsh_target(i: usize, j: usize) -> i8 {
    if i == 1 && j == 1 {
        -1
    } else {
        1
    }
}

/// `a₀ = (1,0)`, `a₁ = (0,1)`, `b₀ = (1,1)/√2`, `b₁ = (1,−1)/√2`.
pub fn chsh_vectors() -> ([UnitVector; 2], [UnitVector; 2]) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let v = |x: f64, y: f64| UnitVector::new(vec![x, y]).expect("unit");
    ([v(1.0, 0.0), v(0.0, 1.0)], [v(r, r), v(r, -r)])
}

/// Result of playing the CHSH game with uniformly random inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub protocol: String,
    pub win_rate: f64,
    pub stderr: f64,
    /// Win rate per input `(i, j)`, row `i`.
    pub per_input: [[f64; 2]; 2],
    pub report: SimReport,
}

/// Plays the game on the given vectors; trial `t` uses input `t mod 4`.
pub fn chsh_game_value_on(
    protocol: &Protocol,
    alice: &[UnitVector; 2],
    bob: &[UnitVector; 2],
    trials: u64,
    seed: u64,
) -> Result<ChshResult> {
    let pairs: Vec<(UnitVector, UnitVector)> = (0..4)
        .map(|t| (alice[t / 2].clone(), bob[t % 2].clone()))
        .collect();
    let report = simulate(protocol, &pairs, trials, seed)?;
    let mut per_input = [[0.0; 2]; 2];
    let (mut rate, mut var) = (0.0, 0.0);
    for (t, stats) in report.pairs.iter().enumerate() {
        let (i, j) = (t / 2, t % 2);
        let s = f64::from(chsh_target(i, j));
        let w = 0.5 * (1.0 + s * stats.estimate.mean);
        per_input[i][j] = w;
        rate += 0.25 * w;
        var += (0.125 * stats.estimate.stderr).powi(2);
    }
    Ok(ChshResult {
        protocol: protocol.name(),
        win_rate: rate,
        stderr: var.sqrt(),
        per_input,
        report,
    })
}

/// Plays the game on the two-dimensional vectors of [`chsh_vectors`].
pub fn chsh_game_value(protocol: &Protocol, trials: u64, seed: u64) -> Result<ChshResult> {
    let (alice, bob) = chsh_vectors();
    chsh_game_value_on(protocol, &alice, &bob, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::trial_rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn maximally_mixed_is_uncorrelated() {
        let rho = DensityMatrix::new(CMatrix::identity(4, 4) / Complex64::new(4.0, 0.0)).unwrap();
        let inst = chsh_instance();
        let e = expectation(&rho, &inst.alice[0], &inst.bob[1]).unwrap();
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn chsh_pattern() {
        let inst = chsh_instance();
        for i in 0..2 {
            for j in 0..2 {
                let e = expectation(&inst.rho, &inst.alice[i], &inst.bob[j]).unwrap();
                let want = f64::from(chsh_target(i, j)) * FRAC_1_SQRT_2;
                assert!((e - want).abs() < 1e-12);
                let r = reduce_to_vectors(&inst.rho, &inst.alice[i], &inst.bob[j]).unwrap();
                assert_eq!(r.a.dim(), 32);
                assert!((r.a.dot(&r.b) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_states_factor() {
        let mut rng = trial_rng(3, 0);
        let ra = DensityMatrix::random(1, &mut rng);
        assert_eq!(ra.local_dim(), 1);
        let pa = {
            let g = CMatrix::from_fn(2, 2, |_, _| complex_normal(&mut rng));
            let w = &g * g.adjoint();
            let t = w.trace();
            w / t
        };
        let pb = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.3, 0.0),
            Complex64::new(0.7, 0.0),
        ]));
        let rho = DensityMatrix::product(&pa, &pb).unwrap();
        let (a, b) = (
            Observable::random(2, &mut rng),
            Observable::random(2, &mut rng),
        );
        let ea = (a.matrix() * &pa).trace().re;
        let eb = (b.matrix() * &pb).trace().re;
        assert!((expectation(&rho, &a, &b).unwrap() - ea * eb).abs() < 1e-12);
    }

    #[test]
    fn identity_observables() {
        let mut rng = trial_rng(6, 0);
        let rho = DensityMatrix::random(3, &mut rng);
        let id = Observable::new(CMatrix::identity(3, 3)).unwrap();
        let r = reduce_to_vectors(&rho, &id, &id).unwrap();
        assert!((r.a.dot(&r.b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let not_hermitian = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        assert!(Observable::new(not_hermitian).is_err());
        assert!(Observable::from_real(2, &[2.0, 0.0, 0.0, 1.0]).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(4, 4)).is_err());
        let neg = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        assert!(DensityMatrix::new(neg).is_err());
    }

    #[test]
    fn constant_strategy_scores_three_quarters() {
        let r = chsh_game_value(&Protocol::Constant, 4000, 0).unwrap();
        assert_eq!(r.win_rate, 0.75);
    }
}
