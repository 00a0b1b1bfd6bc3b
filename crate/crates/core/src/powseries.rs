//! Truncated formal power series in one real variable.
//!
//! A [`Series`] stores coefficients `c_0 ..= c_N` together with a declared
//! parity. Every operation truncates at an explicit order, so results never
//! claim more information than their inputs carry. Parity is tracked through
//! products, compositions and reversion, and coefficients of the wrong parity
//! are pinned to exact zero.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default truncation order for the coefficient sign checks (odd degrees up to 61).
pub const DEFAULT_SIGN_ORDER: usize = 61;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
    None,
}

impl Parity {
    fn product(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Odd, Parity::Odd) | (Parity::Even, Parity::Even) => Parity::Even,
            (Parity::Odd, Parity::Even) | (Parity::Even, Parity::Odd) => Parity::Odd,
            _ => Parity::None,
        }
    }

    fn sum(self, other: Parity) -> Parity {
        if self == other {
            self
        } else {
            Parity::None
        }
    }

    fn flip(self) -> Parity {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
            Parity::None => Parity::None,
        }
    }

    /// True if degree `k` is allowed a nonzero coefficient.
    fn admits(self, k: usize) -> bool {
        match self {
            Parity::Odd => k % 2 == 1,
            Parity::Even => k % 2 == 0,
            Parity::None => true,
        }
    }
}

/// A power series truncated at `max_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
    parity: Parity,
}

impl Series {
    /// Builds a series and infers its parity from exact zeros.
    pub fn new(coeffs: Vec<f64>) -> Result<Series> {
        check_finite(&coeffs)?;
        let coeffs = non_empty(coeffs);
        let odd_zero = coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0);
        let even_zero = coeffs.iter().step_by(2).all(|&c| c == 0.0);
        let parity = match (even_zero, odd_zero) {
            (true, false) => Parity::Odd,
            (false, true) => Parity::Even,
            _ => Parity::None,
        };
        Ok(Series { coeffs, parity })
    }

    /// Builds a series with a declared parity, rejecting coefficients that break it.
    pub fn with_parity(coeffs: Vec<f64>, parity: Parity) -> Result<Series> {
        check_finite(&coeffs)?;
        let coeffs = non_empty(coeffs);
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 && !parity.admits(k) {
                return Err(Error::Parity {
                    degree: k,
                    value: c,
                });
            }
        }
        Ok(Series { coeffs, parity })
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> f64) -> Result<Series> {
        Series::new((0..=order).map(f).collect())
    }

    pub fn zero(order: usize) -> Series {
        Series {
            coeffs: vec![0.0; order + 1],
            parity: Parity::None,
        }
    }

    pub fn constant(c: f64, order: usize) -> Series {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Series {
            coeffs,
            parity: Parity::Even,
        }
    }

    /// The identity series `x`.
    pub fn identity(order: usize) -> Series {
        Series::monomial(1.0, 1, order)
    }

    /// `c·x^degree`, truncated at `order`.
    pub fn monomial(c: f64, degree: usize, order: usize) -> Series {
        let mut coeffs = vec![0.0; order + 1];
        if degree <= order {
            coeffs[degree] = c;
        }
        let parity = if degree % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        };
        Series { coeffs, parity }
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `x^k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Truncates or zero-pads to exactly `order`.
    pub fn resized(&self, order: usize) -> Series {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Series {
            coeffs,
            parity: self.parity,
        }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, c: f64) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
            parity: self.parity,
        }
    }

    /// `f(c·x)`.
    pub fn scale_arg(&self, c: f64) -> Series {
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| {
                let v = a * p;
                p *= c;
                v
            })
            .collect();
        Series {
            coeffs,
            parity: self.parity,
        }
    }

    /// Termwise sum; the result has the larger of the two orders.
    pub fn add(&self, other: &Series) -> Series {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Series {
            coeffs,
            parity: self.parity.sum(other.parity),
        }
        .enforce_parity()
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.scale(-1.0))
    }

    pub fn add_constant(&self, c: f64) -> Series {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        let parity = if c != 0.0 {
            self.parity.sum(Parity::Even)
        } else {
            self.parity
        };
        Series { coeffs, parity }
    }

    /// Cauchy product truncated at `order`.
    pub fn product(&self, other: &Series, order: usize) -> Series {
        let mut coeffs = vec![0.0; order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        Series {
            coeffs,
            parity: self.parity.product(other.parity),
        }
        .enforce_parity()
    }

    /// `x·f(x)`, keeping the same truncation order.
    pub fn shift_up(&self) -> Series {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        Series {
            coeffs,
            parity: self.parity.flip(),
        }
    }

    /// `f(x²)`, of order `2·max_order`.
    pub fn substitute_square(&self) -> Series {
        let mut coeffs = vec![0.0; 2 * self.max_order() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[2 * k] = c;
        }
        Series {
            coeffs,
            parity: Parity::Even,
        }
    }

    /// Taylor coefficients of `self ∘ inner` through degree `order`.
    pub fn compose(&self, inner: &Series, order: usize) -> Result<Series> {
        if inner.coeff(0) != 0.0 {
            return Err(Error::NonzeroConstant(inner.coeff(0)));
        }
        let inner = inner.resized(order);
        // Degrees above `order` of the outer series cannot reach the result.
        let top = self.max_order().min(order);
        let mut acc = Series::constant(self.coeff(top), order);
        for k in (0..top).rev() {
            acc = acc.product(&inner, order).add_constant(self.coeff(k));
        }
        let parity = match (self.parity, inner.parity) {
            (Parity::Odd, Parity::Odd) => Parity::Odd,
            (Parity::Even, Parity::Odd) | (_, Parity::Even) => Parity::Even,
            _ => Parity::None,
        };
        Ok(Series {
            coeffs: acc.coeffs,
            parity,
        }
        .enforce_parity())
    }

    /// Compositional inverse `g` with `self ∘ g = x` through degree `order`.
    ///
    /// Solves the composition equations degree by degree. With `p[k][m]` the
    /// coefficient of `x^m` in `g^k`, the degree-`m` equation is linear in
    /// `g_m` once `g_1 .. g_{m-1}` are known, giving an `O(N³)` recurrence.
    pub fn revert(&self, order: usize) -> Result<Series> {
        if self.coeff(0) != 0.0 {
            return Err(Error::NonzeroConstant(self.coeff(0)));
        }
        let f1 = self.coeff(1);
        if f1 == 0.0 || !(1.0 / f1).is_finite() {
            return Err(Error::ZeroLinear);
        }
        let mut g = vec![0.0; order + 1];
        if order == 0 {
            return Ok(Series::zero(0));
        }
        g[1] = 1.0 / f1;
        // powers[k][m] = [x^m] g^k, for k >= 1.
        let mut powers = vec![vec![0.0; order + 1]; order + 1];
        powers[1][1] = g[1];
        for m in 2..=order {
            let mut rhs = 0.0;
            for k in 2..=m {
                let mut s = 0.0;
                for j in 1..=(m - k + 1) {
                    s += g[j] * powers[k - 1][m - j];
                }
                powers[k][m] = s;
                rhs += self.coeff(k) * s;
            }
            g[m] = -rhs / f1;
            powers[1][m] = g[m];
        }
        let parity = match self.parity {
            Parity::Odd => Parity::Odd,
            _ => Parity::None,
        };
        Ok(Series { coeffs: g, parity }.enforce_parity())
    }

    /// Termwise antiderivative with zero constant term (order grows by one).
    pub fn integrate(&self) -> Series {
        let mut coeffs = vec![0.0; self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k + 1] = c / (k as f64 + 1.0);
        }
        Series {
            coeffs,
            parity: self.parity.flip(),
        }
    }

    /// Termwise derivative (order drops by one, never below zero).
    pub fn differentiate(&self) -> Series {
        if self.coeffs.len() == 1 {
            return Series::zero(0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Series {
            coeffs,
            parity: self.parity.flip(),
        }
    }

    fn enforce_parity(mut self) -> Series {
        if self.parity == Parity::None {
            return Series::new(self.coeffs).expect("coefficients stay finite");
        }
        let parity = self.parity;
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            if !parity.admits(k) {
                *c = 0.0;
            }
        }
        self
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}·x")?,
                _ => write!(f, "{a}·x^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.max_order() + 1)
    }
}

/// Named Maclaurin series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    /// `arcsin x`
    Arcsin,
    /// `√(1 − x)`
    Sqrt1m,
    /// `1 / (1 − x)`
    Geom,
    /// `(1 − x)^α`
    Binom(f64),
}

impl Elementary {
    pub fn series(self, order: usize) -> Series {
        match self {
            Elementary::Arcsin => {
                let mut coeffs = vec![0.0; order + 1];
                // central binomial ratio C(2n, n) / 4^n
                let mut central = 1.0;
                let mut n = 0usize;
                while 2 * n + 1 <= order {
                    if n > 0 {
                        central *= (2 * n - 1) as f64 / (2 * n) as f64;
                    }
                    coeffs[2 * n + 1] = central / (2 * n + 1) as f64;
                    n += 1;
                }
                Series {
                    coeffs,
                    parity: Parity::Odd,
                }
            }
            Elementary::Sqrt1m => Elementary::Binom(0.5).series(order),
            Elementary::Geom => Series {
                coeffs: vec![1.0; order + 1],
                parity: Parity::None,
            },
            Elementary::Binom(alpha) => {
                let mut coeffs = vec![0.0; order + 1];
                coeffs[0] = 1.0;
                for k in 1..=order {
                    coeffs[k] = coeffs[k - 1] * ((k - 1) as f64 - alpha) / k as f64;
                }
                Series::new(coeffs).expect("binomial coefficients are finite")
            }
        }
    }
}

impl FromStr for Elementary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Elementary> {
        let s = s.trim();
        match s {
            "arcsin" => return Ok(Elementary::Arcsin),
            "sqrt1m" => return Ok(Elementary::Sqrt1m),
            "geom" => return Ok(Elementary::Geom),
            _ => {}
        }
        s.strip_prefix("binom(")
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|arg| parse_number(arg.trim()))
            .map(Elementary::Binom)
            .ok_or_else(|| Error::UnknownSeries(s.to_string()))
    }
}

/// Accepts plain decimals and simple fractions such as `-1/2`.
fn parse_number(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        (den != 0.0).then(|| num / den)
    } else {
        s.parse().ok()
    }
}

fn check_finite(coeffs: &[f64]) -> Result<()> {
    match coeffs.iter().position(|c| !c.is_finite()) {
        Some(degree) => Err(Error::NonFinite { degree }),
        None => Ok(()),
    }
}

fn non_empty(mut coeffs: Vec<f64>) -> Vec<f64> {
    if coeffs.is_empty() {
        coeffs.push(0.0);
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[f64]) -> Series {
        Series::new(c.to_vec()).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let p = s(&[1.0, 1.0]).product(&s(&[1.0, -1.0]), 2);
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);
        assert_eq!(p.parity(), Parity::Even);
    }

    #[test]
    fn x_times_x() {
        let x = Series::identity(2);
        assert_eq!(x.product(&x, 2).coeffs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn product_with_zero() {
        let a = s(&[0.3, -1.2, 4.0, 0.5]);
        let z = Series::zero(3);
        assert!(a.product(&z, 3).coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn compose_square_of_x_plus_x2() {
        let outer = Series::monomial(1.0, 2, 4);
        let inner = s(&[0.0, 1.0, 1.0]);
        let r = outer.compose(&inner, 4).unwrap();
        assert_eq!(r.coeffs(), &[0.0, 0.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn compose_with_identity() {
        let f = s(&[0.7, -0.2, 0.1, 3.0, -1.5]);
        let r = f.compose(&Series::identity(4), 4).unwrap();
        assert_eq!(r.coeffs(), f.coeffs());
    }

    #[test]
    fn compose_rejects_constant_inner() {
        let err = Series::identity(3).compose(&s(&[0.5, 1.0]), 3).unwrap_err();
        assert_eq!(err, Error::NonzeroConstant(0.5));
    }

    #[test]
    fn arcsin_of_sin_is_identity() {
        // sin x Maclaurin coefficients
        let sin = Series::from_fn(9, |k| {
            if k % 2 == 0 {
                0.0
            } else {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign / (1..=k).map(|i| i as f64).product::<f64>()
            }
        })
        .unwrap();
        let r = Elementary::Arcsin.series(9).compose(&sin, 9).unwrap();
        assert_eq!(r.parity(), Parity::Odd);
        assert!((r.coeff(1) - 1.0).abs() < 1e-12);
        for k in [3, 5, 7, 9] {
            assert!(r.coeff(k).abs() < 1e-12, "degree {k}: {}", r.coeff(k));
        }
    }

    #[test]
    fn revert_remark_example() {
        // hand solution: g1 = 1/0.9, g3 = -0.1 g1^3 / 0.9,
        // g5 = -0.3 g1^2 g3 / 0.9
        let f = s(&[0.0, 0.9, 0.0, 0.1]);
        let g = f.revert(5).unwrap();
        let g1: f64 = 1.0 / 0.9;
        let g3 = -0.1 * g1.powi(3) / 0.9;
        let g5 = -0.3 * g1 * g1 * g3 / 0.9;
        assert!((g.coeff(1) - g1).abs() < 1e-14);
        assert!((g.coeff(3) - g3).abs() < 1e-14);
        assert!((g.coeff(5) - g5).abs() < 1e-14);
        assert!((g.coeff(1) - 1.11).abs() < 0.005);
        assert!((g.coeff(3) + 0.15).abs() < 0.005);
        assert!((g.coeff(5) - 0.06).abs() < 0.005);
    }

    #[test]
    fn revert_identity() {
        let g = Series::identity(7).revert(7).unwrap();
        assert_eq!(g.coeffs(), Series::identity(7).coeffs());
    }

    #[test]
    fn revert_second_remark_example() {
        let f = s(&[0.0, 1.0, 0.0, 0.1, 0.0, -0.1]);
        let g = f.revert(3).unwrap();
        assert!((g.coeff(1) - 1.0).abs() < 1e-15);
        assert!((g.coeff(3) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn revert_rejects_zero_linear() {
        let f = s(&[0.0, 0.0, 1.0]);
        assert_eq!(f.revert(4).unwrap_err(), Error::ZeroLinear);
    }

    #[test]
    fn revert_of_odd_is_odd() {
        let f = s(&[0.0, 1.3, 0.0, -0.2, 0.0, 0.05]);
        let g = f.revert(11).unwrap();
        assert_eq!(g.parity(), Parity::Odd);
        assert!(g.coeffs().iter().step_by(2).all(|&c| c == 0.0));
    }

    #[test]
    fn calculus() {
        let cube = Series::monomial(1.0, 3, 3);
        assert_eq!(cube.differentiate().coeffs(), &[0.0, 0.0, 3.0]);
        let sq3 = Series::monomial(3.0, 2, 2);
        assert_eq!(sq3.integrate().coeffs(), &[0.0, 0.0, 0.0, 1.0]);
        let f = s(&[2.0, -1.0, 0.5, 0.25]);
        let back = f.differentiate().integrate();
        assert_eq!(back.coeffs(), &[0.0, -1.0, 0.5, 0.25]);
    }

    #[test]
    fn elementary_series() {
        let a = Elementary::Arcsin.series(5);
        assert_eq!(a.coeffs(), &[0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0]);
        assert!((a.eval(0.1) - 0.1f64.asin()).abs() < 1e-8);
        assert_eq!(Elementary::Geom.series(3).coeffs(), &[1.0; 4]);
        let b = Elementary::Binom(-0.5).series(2);
        assert_eq!(b.coeffs(), &[1.0, 0.5, 0.375]);
        let r = Elementary::Sqrt1m.series(30).eval(0.3);
        assert!((r - 0.7f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parse_elementary_names() {
        assert_eq!("arcsin".parse::<Elementary>().unwrap(), Elementary::Arcsin);
        assert_eq!(
            "binom(-1/2)".parse::<Elementary>().unwrap(),
            Elementary::Binom(-0.5)
        );
        assert_eq!(
            "binom(1.5)".parse::<Elementary>().unwrap(),
            Elementary::Binom(1.5)
        );
        assert!(matches!(
            "arctan".parse::<Elementary>(),
            Err(Error::UnknownSeries(_))
        ));
    }

    #[test]
    fn declared_parity_is_checked() {
        assert!(Series::with_parity(vec![0.0, 1.0, 0.5], Parity::Odd).is_err());
        assert!(Series::with_parity(vec![0.0, 1.0, 0.0, 2.0], Parity::Odd).is_ok());
        assert!(matches!(
            Series::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { degree: 1 })
        ));
    }
}
