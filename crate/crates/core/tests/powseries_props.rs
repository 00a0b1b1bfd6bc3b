mod common;

use common::{eval_poly, lagrange_inverse};
use corrsim::powseries::{Parity, Series};
use proptest::prelude::*;

fn odd_series(order: usize) -> impl Strategy<Value = Series> {
    (0.5f64..2.0, prop::collection::vec(-0.3f64..0.3, order / 2)).prop_map(move |(c1, rest)| {
        let mut c = vec![0.0; order + 1];
        c[1] = c1;
        for (i, r) in rest.iter().enumerate() {
            let k = 2 * i + 3;
            c[k] = r / (k * k) as f64;
        }
        Series::new(c).unwrap()
    })
}

fn general_series(order: usize) -> impl Strategy<Value = Series> {
    (0.5f64..2.0, prop::collection::vec(-0.3f64..0.3, order - 1)).prop_map(move |(c1, rest)| {
        let mut c = vec![0.0, c1];
        c.extend(
            rest.iter()
                .enumerate()
                .map(|(i, r)| r / ((i + 2) * (i + 2)) as f64),
        );
        Series::new(c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reversion_round_trip(h in general_series(15)) {
        let g = h.revert(15).unwrap();
        let hg = h.compose(&g, 15).unwrap();
        let gh = g.compose(&h, 15).unwrap();
        for k in 0..=15 {
            let want = if k == 1 { 1.0 } else { 0.0 };
            prop_assert!((hg.coeff(k) - want).abs() < 1e-9, "h∘g degree {}", k);
            prop_assert!((gh.coeff(k) - want).abs() < 1e-9, "g∘h degree {}", k);
        }
    }

    #[test]
    fn reversion_agrees_with_lagrange(h in general_series(21)) {
        let g = h.revert(21).unwrap();
        let oracle = lagrange_inverse(h.coeffs(), 21);
        for k in 0..=21 {
            prop_assert!((g.coeff(k) - oracle[k]).abs() <= 1e-9 * oracle[k].abs().max(1.0));
        }
    }

    #[test]
    fn odd_series_revert_to_odd(h in odd_series(21)) {
        let g = h.revert(21).unwrap();
        prop_assert_eq!(g.parity(), Parity::Odd);
        for k in (0..=21).step_by(2) {
            prop_assert_eq!(g.coeff(k), 0.0);
        }
    }

    #[test]
    fn product_and_composition_evaluate_pointwise(a in odd_series(11), b in odd_series(11), x in -0.3f64..0.3) {
        let p = a.product(&b, 22);
        prop_assert_eq!(p.parity(), Parity::Even);
        prop_assert!((p.eval(x) - a.eval(x) * b.eval(x)).abs() < 1e-12);
        // composition truncated at degree 11 differs by O(x^13)
        let c = a.compose(&b, 121).unwrap();
        prop_assert!((c.eval(x) - eval_poly(a.coeffs(), b.eval(x))).abs() < 1e-12);
    }

    #[test]
    fn integrate_inverts_differentiate(a in general_series(12)) {
        let back = a.differentiate().integrate();
        for k in 1..=12 {
            prop_assert!((back.coeff(k) - a.coeff(k)).abs() < 1e-15);
        }
    }
}
