//! Spherical and Gaussian geometry behind the orthant protocol: spherical
//! triangle areas (Girard), wedge-product inner products, dihedral angles,
//! the tetrahedron volume obtained by integrating Schläfli's formula, and the
//! Gaussian models whose positive-orthant probability defines the protocol's
//! correlation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corrfun::{check_rho, ort2_integral};
use crate::error::{Error, Result};
use crate::mc::{run_trials, Tally};

const DEGENERATE: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(v: &[f64]) -> Result<Vec<f64>> {
    let n = dot(v, v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Degenerate("zero or non-finite vertex".into()));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (dot(a, a) * dot(b, b)).sqrt();
    c.clamp(-1.0, 1.0).acos()
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Area of the spherical triangle cut out by the cone over `v1, v2, v3`:
/// the sum of its surface angles minus π.
pub fn girard_area(v1: &[f64], v2: &[f64], v3: &[f64]) -> Result<f64> {
    for v in [v1, v2, v3] {
        if v.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: v.len(),
            });
        }
    }
    let vs = [normalized(v1)?, normalized(v2)?, normalized(v3)?];
    let det = det3([
        [vs[0][0], vs[0][1], vs[0][2]],
        [vs[1][0], vs[1][1], vs[1][2]],
        [vs[2][0], vs[2][1], vs[2][2]],
    ]);
    if det.abs() < DEGENERATE {
        return Err(Error::Degenerate("coplanar triangle vertices".into()));
    }
    let surface_angle = |apex: &[f64], p: &[f64], q: &[f64]| {
        // project onto the tangent plane at the apex
        let tp: Vec<f64> = p
            .iter()
            .zip(apex)
            .map(|(x, a)| x - dot(p, apex) * a)
            .collect();
        let tq: Vec<f64> = q
            .iter()
            .zip(apex)
            .map(|(x, a)| x - dot(q, apex) * a)
            .collect();
        angle_between(&tp, &tq)
    };
    let a1 = surface_angle(&vs[0], &vs[1], &vs[2]);
    let a2 = surface_angle(&vs[1], &vs[2], &vs[0]);
    let a3 = surface_angle(&vs[2], &vs[0], &vs[1]);
    Ok(a1 + a2 + a3 - PI)
}

/// `⟨a1∧a2∧a3, b1∧b2∧b3⟩ = det[⟨a_i, b_j⟩]`.
pub fn wedge_ip(a: [&[f64]; 3], b: [&[f64]; 3]) -> f64 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = dot(a[i], b[j]);
        }
    }
    det3(m)
}

pub fn wedge_norm(a: [&[f64]; 3]) -> f64 {
    wedge_ip(a, a).max(0.0).sqrt()
}

/// Index pairs `(i, j)`, `i < j`, in the order used for edge and dihedral angles.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A spherical tetrahedron on `S^3` given by four unit vertices in `R^4`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalSimplex {
    vertices: [Vec<f64>; 4],
}

impl SphericalSimplex {
    pub fn new(vertices: [Vec<f64>; 4]) -> Result<SphericalSimplex> {
        for v in &vertices {
            if v.len() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: v.len(),
                });
            }
            let norm = dot(v, v).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NotUnit { norm });
            }
        }
        let gram = DMatrix::from_fn(4, 4, |i, j| dot(&vertices[i], &vertices[j]));
        if gram.determinant().abs() < DEGENERATE {
            return Err(Error::Degenerate("linearly dependent vertices".into()));
        }
        Ok(SphericalSimplex { vertices })
    }

    /// Normalizes the four directions first.
    pub fn from_directions(dirs: [&[f64]; 4]) -> Result<SphericalSimplex> {
        SphericalSimplex::new([
            normalized(dirs[0])?,
            normalized(dirs[1])?,
            normalized(dirs[2])?,
            normalized(dirs[3])?,
        ])
    }

    pub fn vertices(&self) -> &[Vec<f64>; 4] {
        &self.vertices
    }

    /// Edge lengths `θ_ij = arccos⟨v_i, v_j⟩`, ordered as [`PAIRS`].
    pub fn edge_angles(&self) -> [f64; 6] {
        PAIRS.map(|(i, j)| {
            dot(&self.vertices[i], &self.vertices[j])
                .clamp(-1.0, 1.0)
                .acos()
        })
    }

    /// Dihedral angles `λ_ij` from the wedge-product formula, ordered as [`PAIRS`].
    pub fn dihedral_angles(&self) -> Result<[f64; 6]> {
        let v = &self.vertices;
        let mut out = [0.0; 6];
        for (slot, &(i, j)) in PAIRS.iter().enumerate() {
            let mut rest = (0..4).filter(|&m| m != i && m != j);
            let (k, l) = (rest.next().unwrap(), rest.next().unwrap());
            let face_k = [v[i].as_slice(), &v[j], &v[k]];
            let face_l = [v[i].as_slice(), &v[j], &v[l]];
            let (nk, nl) = (wedge_norm(face_k), wedge_norm(face_l));
            if nk < DEGENERATE || nl < DEGENERATE {
                return Err(Error::Degenerate(format!("face through edge {i}{j}")));
            }
            out[slot] = (wedge_ip(face_k, face_l) / (nk * nl))
                .clamp(-1.0, 1.0)
                .acos();
        }
        Ok(out)
    }
}

/// Volume of the spherical tetrahedron spanned by the k = 2 orthant cone,
/// `∫_{−1}^{ρ} 3·½·arccos(σ²/(3−2σ²))/√(3−σ²) dσ`.
pub fn tetra_volume(rho: f64) -> Result<f64> {
    let rho = check_rho(rho)?;
    Ok(1.5 * ort2_integral(rho))
}

/// `Σ_ij (θ_ij/2)·dλ_ij/dρ` for the k = 2 orthant tetrahedron, with the
/// dihedral derivatives taken by central differences of the wedge formula.
pub fn schlafli_volume_rate(rho: f64, step: f64) -> Result<f64> {
    let simplex = |r: f64| OrthantModel::new(2, r)?.tetrahedron();
    let theta = simplex(rho)?.edge_angles();
    let plus = simplex(rho + step)?.dihedral_angles()?;
    let minus = simplex(rho - step)?.dihedral_angles()?;
    Ok((0..6)
        .map(|m| 0.5 * theta[m] * (plus[m] - minus[m]) / (2.0 * step))
        .sum())
}

/// Covariance of `(G a, G b)` for a `(k+1) × n` standard Gaussian `G`:
/// `[[I, ρI], [ρI, I]]`.
pub fn joint_covariance(k: usize, rho: f64) -> DMatrix<f64> {
    let m = k + 1;
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        if i == j {
            1.0
        } else if i % m == j % m {
            rho
        } else {
            0.0
        }
    })
}

/// The map `(G a, G b) ↦ (G a, Σ_i (G b)_i)`.
pub fn coordinate_sum_map(k: usize) -> DMatrix<f64> {
    let m = k + 1;
    DMatrix::from_fn(m + 1, 2 * m, |i, j| {
        if i < m {
            if i == j {
                1.0
            } else {
                0.0
            }
        } else if j >= m {
            1.0
        } else {
            0.0
        }
    })
}

/// Gaussian model of Alice's projections together with Bob's coordinate sum.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthantModel {
    k: usize,
    rho: f64,
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl OrthantModel {
    pub fn new(k: usize, rho: f64) -> Result<OrthantModel> {
        if k > 2 {
            return Err(Error::Unsupported(format!("orthant model k = {k}")));
        }
        let rho = check_rho(rho)?;
        let m = k + 2;
        let covariance = DMatrix::from_fn(m, m, |i, j| {
            let last = m - 1;
            match (i == last, j == last) {
                (true, true) => (k + 1) as f64,
                (true, false) | (false, true) => rho,
                (false, false) => {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
        });
        let factor = upper_cholesky(&covariance)?;
        Ok(OrthantModel {
            k,
            rho,
            covariance,
            factor,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `M'`, the `(k+2) × (k+2)` covariance.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Upper-triangular `C` with `CᵗC = M'`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Normalized rows of `C⁻¹`: the directions spanning the cone whose
    /// spherical measure is the orthant probability.
    pub fn cone_vertices(&self) -> Result<Vec<Vec<f64>>> {
        let inv =
            self.factor.clone().try_inverse().ok_or_else(|| {
                Error::Degenerate(format!("singular factor at rho = {}", self.rho))
            })?;
        inv.row_iter()
            .map(|r| normalized(&r.iter().copied().collect::<Vec<_>>()))
            .collect()
    }

    /// The spherical tetrahedron of the k = 2 model.
    pub fn tetrahedron(&self) -> Result<SphericalSimplex> {
        if self.k != 2 {
            return Err(Error::Unsupported("tetrahedron needs k = 2".into()));
        }
        let v = self.cone_vertices()?;
        SphericalSimplex::new([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()])
    }
}

/// `C` upper triangular with `CᵗC = m`, tolerating a positive semidefinite
/// input (a zero pivot leaves a zero row).
fn upper_cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let pivot = m[(j, j)] - (0..j).map(|p| l[(j, p)] * l[(j, p)]).sum::<f64>();
        if pivot < -1e-12 {
            return Err(Error::Degenerate(
                "covariance is not positive semidefinite".into(),
            ));
        }
        let d = pivot.max(0.0).sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = m[(i, j)] - (0..j).map(|p| l[(i, p)] * l[(j, p)]).sum::<f64>();
            l[(i, j)] = if d > 1e-300 { s / d } else { 0.0 };
        }
    }
    Ok(l.transpose())
}

/// Positive-orthant probability estimate and the correlation `2^{k+2}·P − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthantEstimate {
    pub probability: f64,
    pub probability_stderr: f64,
    pub correlation: f64,
    pub correlation_stderr: f64,
    pub trials: u64,
}

#[derive(Default)]
struct Hits(u64);

impl Tally for Hits {
    fn merge(&mut self, other: Self) {
        self.0 += other.0;
    }
}

/// Samples `x = Cᵗ z` with `z` standard normal and counts `x ≥ 0`.
pub fn orthant_prob_mc(model: &OrthantModel, trials: u64, seed: u64) -> OrthantEstimate {
    assert!(trials > 0, "at least one trial");
    let m = model.k + 2;
    let lower = model.factor.transpose();
    let hits = run_trials(trials, seed, |acc: &mut Hits, _, rng| {
        let mut z = [0.0f64; 4];
        for zi in z.iter_mut().take(m) {
            *zi = StandardNormal.sample(rng);
        }
        let inside = (0..m).all(|i| (0..=i).map(|j| lower[(i, j)] * z[j]).sum::<f64>() >= 0.0);
        if inside {
            acc.0 += 1;
        }
    });
    let p = hits.0 as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    let scale = (1u64 << m) as f64;
    OrthantEstimate {
        probability: p,
        probability_stderr: se,
        correlation: scale * p - 1.0,
        correlation_stderr: scale * se,
        trials,
    }
}
