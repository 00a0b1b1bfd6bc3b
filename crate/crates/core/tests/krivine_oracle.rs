mod common;

use common::{dot, kron_power, lagrange_inverse};
use corrsim::corrfun::{h_mixed_series, h_ort2_series, CorrKind, CorrelationFunction};
use corrsim::krivine::{invert_h, Embedding, InverseSeries, Layout};
use corrsim::mc::trial_rng;
use corrsim::powseries::Series;
use corrsim::protocols::{sample_pair_with_rho, sample_unit_vector};

#[test]
fn ort2_inverse_matches_lagrange() {
    let h = h_ort2_series(61).unwrap();
    let inv = invert_h(&h, 61).unwrap();
    let oracle = lagrange_inverse(h.coeffs(), 61);
    for k in 0..=61 {
        let (got, want) = (inv.d().coeff(k), oracle[k]);
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1e-3),
            "degree {k}: {got} vs {want}"
        );
    }
}

#[test]
fn mixed_inverse_matches_lagrange() {
    let h = h_mixed_series(61).unwrap();
    let inv = invert_h(&h, 61).unwrap();
    let oracle = lagrange_inverse(h.coeffs(), 61);
    for k in (1..=61).step_by(2) {
        assert!((inv.d().coeff(k) - oracle[k]).abs() <= 1e-12 * oracle[k].abs().max(1e-3));
    }
}

#[test]
fn symmetric_and_tensor_layouts_agree_with_kronecker() {
    let mut rng = trial_rng(5, 0);
    let f = InverseSeries::from_kind(CorrKind::Orthant(2), 61).unwrap();
    let sym = Embedding::new(&f, 3, 5, Layout::Symmetric).unwrap();
    let ten = Embedding::new(&f, 3, 5, Layout::Tensor).unwrap();
    assert_eq!(ten.dim(), 3 + 27 + 243);
    for _ in 0..20 {
        let a = sample_unit_vector(3, &mut rng).unwrap();
        let b = sample_unit_vector(3, &mut rng).unwrap();
        let rho = a.dot(&b);
        let mut want = 0.0;
        for (degree, scale) in sym.scales() {
            want += scale
                * scale
                * dot(
                    &kron_power(a.as_slice(), degree),
                    &kron_power(b.as_slice(), degree),
                );
        }
        let s = dot(&sym.embed(&a).unwrap(), &sym.embed(&b).unwrap());
        let t = dot(&ten.embed(&a).unwrap(), &ten.embed(&b).unwrap());
        assert!((s - want).abs() < 1e-12 && (t - want).abs() < 1e-12);
        assert!((s - sym.inner_product_map(rho)).abs() < 1e-12);
    }
}

#[test]
fn cube_embedding() {
    let f = InverseSeries::unchecked(Series::monomial(1.0, 3, 3), None);
    let e = Embedding::new(&f, 4, 3, Layout::Symmetric).unwrap();
    assert_eq!(e.tail_mass(), 0.0);
    let mut rng = trial_rng(1, 1);
    for rho in [-1.0, -0.3, 0.0, 0.8, 1.0] {
        let (a, b) = sample_pair_with_rho(4, rho, &mut rng).unwrap();
        let got = dot(&e.embed(&a).unwrap(), &e.embed(&b).unwrap());
        assert!((got - rho * rho * rho).abs() < 1e-12);
    }
}

#[test]
fn truncated_inverse_within_tail_bound() {
    let f = InverseSeries::from_kind(CorrKind::Orthant(2), 61).unwrap();
    let e = Embedding::new(&f, 3, 9, Layout::Symmetric).unwrap();
    let h = CorrelationFunction::new(CorrKind::Orthant(2)).unwrap();
    let mut rng = trial_rng(2, 0);
    for i in 0..100 {
        let rho = -1.0 + 2.0 * i as f64 / 99.0;
        let (a, b) = sample_pair_with_rho(3, rho, &mut rng).unwrap();
        let (ea, eb) = (e.embed(&a).unwrap(), e.embed(&b).unwrap());
        assert!((dot(&ea, &ea) - 1.0).abs() < 1e-12);
        let exact = h.invert(rho).unwrap();
        assert!(
            (dot(&ea, &eb) - exact).abs() <= 2.0 * e.tail_mass(),
            "rho = {rho}"
        );
    }
}
