//! Correlation functions `h(ρ) = E[αβ]` of the protocols, their power series
//! about zero, and the coefficient-sign verifications that make the orthant
//! and mixed protocols eligible for the Krivine transformation.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::powseries::{Elementary, Series};
use crate::quad;

/// Largest series order the sign checks are calibrated for.
pub const MAX_SERIES_ORDER: usize = 61;

const QUAD_TOL: f64 = 1e-13;

/// `|ρ| ≤ 1`, clamping round-off just outside the interval.
pub(crate) fn check_rho(rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain {
            value: rho,
            domain: "[-1, 1]",
        });
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// No-communication (random hyperplane) correlation `(2/π)·arcsin ρ`.
pub fn h_nocomm(rho: f64) -> Result<f64> {
    Ok(2.0 / PI * check_rho(rho)?.asin())
}

/// `1 − 2·Σ_{i ≤ k/2} C(k+1, i)(1−p)^i p^{k+1−i}`: correlation of a majority
/// vote over `k+1` repetitions that each disagree with probability `p`.
pub fn g_maj(k: usize, p: f64) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::OddMajority(k));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            value: p,
            domain: "[0, 1]",
        });
    }
    let n = k + 1;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for i in 0..=k / 2 {
        if i > 0 {
            binom *= (n - i + 1) as f64 / i as f64;
        }
        sum += binom * (1.0 - p).powi(i as i32) * p.powi((n - i) as i32);
    }
    Ok(1.0 - 2.0 * sum)
}

/// Majority-protocol correlation `g_maj(k, arccos(ρ)/π)`.
pub fn h_maj(k: usize, rho: f64) -> Result<f64> {
    let rho = check_rho(rho)?;
    g_maj(k, rho.acos() / PI)
}

/// Orthant-protocol correlation for `k ∈ {0, 1, 2}` message bits.
pub fn h_ort(k: usize, rho: f64) -> Result<f64> {
    let rho = check_rho(rho)?;
    match k {
        0 => Ok(2.0 / PI * rho.asin()),
        1 => Ok(4.0 / PI * (rho / SQRT_2).asin()),
        // the quadrature may overshoot ±1 by an ulp at the endpoints
        2 => Ok(h_ort2_quadrature(rho).clamp(-1.0, 1.0)),
        _ => Err(Error::Unsupported(format!(
            "orthant correlation for k = {k} (only k <= 2)"
        ))),
    }
}

/// `arccos(σ²/(3−2σ²))`, given `σ` and `1 − σ²` separately so that the
/// caller can supply the gap without cancellation near `|σ| = 1`.
fn acos_ratio(s: f64, gap: f64) -> f64 {
    let denom = 3.0 - 2.0 * s * s;
    // 1 − σ²/(3−2σ²) = 3(1−σ²)/(3−2σ²); arccos y = 2·asin(√((1−y)/2))
    let half_gap = 1.5 * gap / denom;
    2.0 * half_gap.max(0.0).sqrt().min(1.0).asin()
}

/// Integrand of the k = 2 orthant correlation, even in `σ`.
pub fn ort2_integrand(s: f64) -> f64 {
    let gap = (1.0 - s) * (1.0 + s);
    acos_ratio(s, gap) / (3.0 - s * s).sqrt()
}

/// `∫_0^x ort2_integrand` for `x ∈ [0, 1]`, with `σ = 1 − u²` on the upper
/// part to absorb the square-root behavior at `σ = 1`.
fn ort2_half_integral(x: f64) -> f64 {
    const SPLIT: f64 = 0.5;
    if x <= SPLIT {
        return quad::integrate(ort2_integrand, 0.0, x, QUAD_TOL);
    }
    let lower = quad::integrate(ort2_integrand, 0.0, SPLIT, QUAD_TOL);
    let substituted = |u: f64| {
        let s = 1.0 - u * u;
        let gap = u * u * (2.0 - u * u);
        2.0 * u * acos_ratio(s, gap) / (3.0 - s * s).sqrt()
    };
    let u_hi = (1.0 - SPLIT).sqrt();
    let u_lo = (1.0 - x).max(0.0).sqrt();
    lower + quad::integrate(substituted, u_lo, u_hi, QUAD_TOL)
}

fn ort2_full_half() -> f64 {
    static FULL: OnceLock<f64> = OnceLock::new();
    *FULL.get_or_init(|| ort2_half_integral(1.0))
}

/// `∫_{−1}^{ρ} ort2_integrand(σ) dσ`.
pub fn ort2_integral(rho: f64) -> f64 {
    let half = ort2_half_integral(rho.abs().min(1.0));
    ort2_full_half() + rho.signum() * half
}

/// `12/π² ∫_{−1}^{ρ} − 1`, folded with the evenness of the integrand into
/// `12/π² · sgn(ρ) ∫_0^{|ρ|}`, which is odd by construction. The endpoint
/// value `h(1) = 12/π² ∫_0^1` still tests the quadrature against 1.
fn h_ort2_quadrature(rho: f64) -> f64 {
    12.0 / (PI * PI) * rho.signum() * ort2_half_integral(rho.abs().min(1.0))
}

/// Derivative of the k = 2 orthant correlation.
pub fn h_ort2_derivative(rho: f64) -> Result<f64> {
    let rho = check_rho(rho)?;
    Ok(12.0 / (PI * PI) * ort2_integrand(rho))
}

/// Mixing probability of the 1.82-bit protocol: `(8 − 2π)/(8 + (√6 − 2)π)`.
pub fn mixing_p() -> f64 {
    (8.0 - 2.0 * PI) / (8.0 + (6f64.sqrt() - 2.0) * PI)
}

/// `p·h_ort(1, ρ) + (1−p)·h_ort(2, ρ)` with `p = mixing_p()`.
pub fn h_mixed(rho: f64) -> Result<f64> {
    let p = mixing_p();
    Ok(p * h_ort(1, rho)? + (1.0 - p) * h_ort(2, rho)?)
}

/// `B(ε) = 2 − h(1−ε) + h(−1+ε)` for a correlation that depends only on ρ.
pub fn b_eps(h: impl Fn(f64) -> f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain {
            value: epsilon,
            domain: "(0, 1]",
        });
    }
    Ok(2.0 - h(1.0 - epsilon) + h(-1.0 + epsilon))
}

/// `B(ε)` of the one-bit orthant protocol; tends to `8ε/π` as `ε → 0`.
pub fn b_eps_analytic(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain {
            value: epsilon,
            domain: "(0, 1]",
        });
    }
    Ok(2.0 - 2.0 * h_ort(1, 1.0 - epsilon)?)
}

// ---------------------------------------------------------------------------
// Series

fn check_series_order(order: usize) -> Result<()> {
    if order % 2 == 0 || order > MAX_SERIES_ORDER {
        return Err(Error::Unsupported(format!(
            "series order {order}; must be odd and at most {MAX_SERIES_ORDER}"
        )));
    }
    Ok(())
}

/// `(1 − c·t)^α` through degree `order`.
fn binom_scaled(alpha: f64, c: f64, order: usize) -> Series {
    Elementary::Binom(alpha).series(order).scale_arg(c)
}

/// Series in `t` of `arccos(t/(3−2t))`, written as `π/2 − arcsin(u)`.
pub fn acos_ratio_series(order: usize) -> Series {
    // u = t/(3−2t) = (t/3)·1/(1 − 2t/3)
    let u = Series::identity(order)
        .product(&binom_scaled(-1.0, 2.0 / 3.0, order), order)
        .scale(1.0 / 3.0);
    Elementary::Arcsin
        .series(order)
        .compose(&u, order)
        .expect("u has zero constant term")
        .scale(-1.0)
        .add_constant(FRAC_PI_2)
}

/// `(2/π)·arcsin x`.
pub fn h_nocomm_series(order: usize) -> Series {
    Elementary::Arcsin.series(order).scale(2.0 / PI)
}

/// `(4/π)·arcsin(x/√2)`.
pub fn h_ort1_series(order: usize) -> Series {
    Elementary::Arcsin
        .series(order)
        .scale_arg(1.0 / SQRT_2)
        .scale(4.0 / PI)
}

/// Series of the k = 2 orthant correlation: the derivative
/// `12·arccos(x²/(3−2x²)) / (π²·√(3−x²))` expanded in `t = x²`, then
/// integrated termwise.
pub fn h_ort2_series(order: usize) -> Result<Series> {
    check_series_order(order)?;
    let t_order = (order - 1) / 2;
    let inv_sqrt = binom_scaled(-0.5, 1.0 / 3.0, t_order).scale(1.0 / 3f64.sqrt());
    let derivative_t = acos_ratio_series(t_order)
        .product(&inv_sqrt, t_order)
        .scale(12.0 / (PI * PI));
    Ok(derivative_t.substitute_square().integrate())
}

/// Series of `p·h_ort(1,·) + (1−p)·h_ort(2,·)`.
pub fn h_mixed_series(order: usize) -> Result<Series> {
    let p = mixing_p();
    Ok(h_ort1_series(order)
        .scale(p)
        .add(&h_ort2_series(order)?.scale(1.0 - p)))
}

/// Series of the majority correlation, obtained by rewriting
/// `g_maj(k, p)` as a polynomial in `q = 1 − 2p = (2/π)·arcsin x`.
pub fn h_maj_series(k: usize, order: usize) -> Result<Series> {
    if k % 2 == 1 {
        return Err(Error::OddMajority(k));
    }
    let n = k + 1;
    let agree = Series::new(vec![0.5, 0.5]).expect("finite"); // (1 + q)/2 = 1 − p
    let disagree = Series::new(vec![0.5, -0.5]).expect("finite"); // (1 − q)/2 = p
    let power =
        |s: &Series, e: usize| (0..e).fold(Series::constant(1.0, n), |acc, _| acc.product(s, n));
    let mut tail = Series::zero(n);
    let mut binom = 1.0;
    for i in 0..=k / 2 {
        if i > 0 {
            binom *= (n - i + 1) as f64 / i as f64;
        }
        let term = power(&agree, i).product(&power(&disagree, n - i), n);
        tail = tail.add(&term.scale(binom));
    }
    let g_of_q = tail.scale(-2.0).add_constant(1.0);
    g_of_q.compose(&h_nocomm_series(order), order)
}

// ---------------------------------------------------------------------------
// Sign verification

/// One verified claim about a series.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SignCheck {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

/// Series built for a sign verification, together with every check made.
#[derive(Clone, Debug)]
pub struct SignReport {
    pub target: &'static str,
    /// Correlation series `Σ c_k x^k`.
    pub series: Series,
    /// Auxiliary factor series in `t = x²`, by name.
    pub factors: Vec<(&'static str, Series)>,
    pub checks: Vec<SignCheck>,
    first_failure: Option<Error>,
}

impl SignReport {
    fn new(target: &'static str, series: Series) -> SignReport {
        SignReport {
            target,
            series,
            factors: Vec::new(),
            checks: Vec::new(),
            first_failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn factor(&self, name: &str) -> Option<&Series> {
        self.factors
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
    }

    /// Turns the first failed check into an error.
    pub fn ensure(self) -> Result<SignReport> {
        match self.first_failure.clone() {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }

    fn record(&mut self, claim: String, passed: bool, detail: String, failure: Error) {
        if !passed && self.first_failure.is_none() {
            self.first_failure = Some(failure);
        }
        self.checks.push(SignCheck {
            claim,
            passed,
            detail,
        });
    }

    fn check_value(&mut self, claim: &'static str, got: f64, want: f64, tol: f64) {
        let passed = (got - want).abs() <= tol;
        self.record(
            claim.to_string(),
            passed,
            format!("got {got:.15e}, expected {want:.15e}"),
            Error::Precision(format!("{claim}: got {got}, expected {want}")),
        );
    }

    /// Every coefficient of degree in `range` satisfies `pred`.
    fn check_coeffs(
        &mut self,
        claim: &'static str,
        series: &Series,
        degrees: impl Iterator<Item = usize>,
        pred: impl Fn(f64) -> bool,
    ) {
        let mut worst: Option<(usize, f64)> = None;
        let mut count = 0;
        for k in degrees {
            count += 1;
            let c = series.coeff(k);
            if !pred(c) && worst.is_none() {
                worst = Some((k, c));
            }
        }
        let (passed, detail, failure) = match worst {
            None => (
                true,
                format!("{count} coefficients ok"),
                Error::Precision(String::new()),
            ),
            Some((degree, value)) => (
                false,
                format!("degree {degree} has coefficient {value:e}"),
                Error::SignViolation {
                    degree,
                    value,
                    claim,
                },
            ),
        };
        self.record(claim.to_string(), passed, detail, failure);
    }
}

impl fmt::Display for SignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sign report for {}", self.target)?;
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "  [{mark}] {}: {}", c.claim, c.detail)?;
        }
        Ok(())
    }
}

/// Strict negativity threshold for `c_{2k+1}`, `k ≥ 1`.
const STRICT_NEGATIVE: f64 = -1e-15;

fn odd_degrees(from: usize, order: usize) -> impl Iterator<Item = usize> {
    (from..=order).step_by(2)
}

/// Factor series for the k = 2 orthant sign argument, through `t^t_order`:
/// `H1 = 1/((3−t)^{3/2}(3−2t))` and
/// `H2 = √(3(3−t)/(1−t)) − ((3−2t)/2)·arccos(t/(3−2t))`.
pub fn h2_factor_series(t_order: usize) -> (Series, Series) {
    let h1 = binom_scaled(-1.5, 1.0 / 3.0, t_order)
        .product(&binom_scaled(-1.0, 2.0 / 3.0, t_order), t_order)
        .scale(1.0 / (3.0 * 3f64.powf(1.5)));
    let root = binom_scaled(0.5, 1.0 / 3.0, t_order)
        .product(&binom_scaled(-0.5, 1.0, t_order), t_order)
        .scale(3.0);
    let linear = Series::new(vec![1.5, -1.0]).expect("finite");
    let h2 = root.sub(&linear.product(&acos_ratio_series(t_order), t_order));
    (h1, h2)
}

/// Sign report for the k = 2 orthant series without failing on violations.
pub fn h2_sign_report(order: usize) -> Result<SignReport> {
    let series = h_ort2_series(order)?;
    let t_order = order - 1;
    let (h1, h2) = h2_factor_series(t_order);
    let mut report = SignReport::new("ort2", series.clone());

    report.check_value("c1 = 2√3/π", series.coeff(1), 2.0 * 3f64.sqrt() / PI, 1e-12);
    report.check_coeffs("c1 > 0", &series, std::iter::once(1), |c| c > 0.0);
    report.check_coeffs(
        "c_{2k+1} < 0 for k >= 1",
        &series,
        odd_degrees(3, order),
        |c| c < STRICT_NEGATIVE,
    );
    report.check_coeffs("H1 coefficients > 0", &h1, 0..=t_order, |c| c > 0.0);
    report.check_value("H2(0) = 3 − 3π/4", h2.coeff(0), 3.0 - 0.75 * PI, 1e-12);
    report.check_value("H2'(0) = (3+π)/2", h2.coeff(1), (3.0 + PI) / 2.0, 1e-12);
    report.check_coeffs("H2(0), H2'(0) > 0", &h2, 0..=1, |c| c > 0.0);
    report.check_coeffs("H2 coefficients >= 0", &h2, 0..=t_order, |c| c >= 0.0);
    report.factors = vec![("H1", h1), ("H2", h2)];
    Ok(report)
}

/// Verifies `c_1 > 0`, `c_{2k+1} < 0` and the positivity of the factor series.
pub fn check_h2_coeff_signs(order: usize) -> Result<SignReport> {
    h2_sign_report(order)?.ensure()
}

/// Factor series of the mixed-protocol sign argument, through `t^t_order`,
/// returned as `[H1, H2, H3, H4]`.
pub fn mixed_factor_series(t_order: usize) -> [Series; 4] {
    let p = mixing_p();
    let n = t_order;
    let acos = acos_ratio_series(n);
    // H1 = (2 − t)^{−3/2}
    let h1 = binom_scaled(-1.5, 0.5, n).scale(2f64.powf(-1.5));
    // √(3(3−t)/(1−t))
    let root = binom_scaled(0.5, 1.0 / 3.0, n)
        .product(&binom_scaled(-0.5, 1.0, n), n)
        .scale(3.0);
    let inv_3m2t = binom_scaled(-1.0, 2.0 / 3.0, n).scale(1.0 / 3.0);
    let bracket = inv_3m2t.product(&root, n).sub(&acos.scale(0.5));
    let h3 = binom_scaled(1.5, 0.5, n)
        .scale(2f64.powf(1.5))
        .product(&bracket, n);
    // H2 = −pπ/6 + (1−p)(3−t)^{−3/2} H3
    let h2 = binom_scaled(-1.5, 1.0 / 3.0, n)
        .scale(3f64.powf(-1.5))
        .product(&h3, n)
        .scale(1.0 - p)
        .add_constant(-p * PI / 6.0);
    // H4 = P(t) / ((3−2t)^3 (1−t)^{5/2} √(3−t)) − arccos(t/(3−2t)) / (2√3)
    let poly = Series::new(vec![79.0, -157.0, 85.0, 11.0, -20.0, 4.0])
        .expect("finite")
        .resized(n);
    let denom = binom_scaled(-3.0, 2.0 / 3.0, n)
        .scale(1.0 / 27.0)
        .product(&binom_scaled(-2.5, 1.0, n), n)
        .product(
            &binom_scaled(-0.5, 1.0 / 3.0, n).scale(1.0 / 3f64.sqrt()),
            n,
        );
    let h4 = poly
        .product(&denom, n)
        .sub(&acos.scale(1.0 / (2.0 * 3f64.sqrt())));
    [h1, h2, h3, h4]
}

/// Tolerance on `c_{2k+1} ≤ 0` for the mixed series. Its `c_3` vanishes
/// exactly (`H2(0) = 0`), so the computed value is pure round-off.
const MIXED_NONPOSITIVE: f64 = 1e-14;

/// Sign report for the mixed-protocol series without failing on violations.
pub fn mixed_sign_report(order: usize) -> Result<SignReport> {
    let series = h_mixed_series(order)?;
    let t_order = order - 1;
    let [h1, h2, h3, h4] = mixed_factor_series(t_order);
    let mut report = SignReport::new("mixed", series.clone());
    let sqrt2 = SQRT_2;
    let sqrt3 = 3f64.sqrt();

    report.check_coeffs("c1 > 0", &series, std::iter::once(1), |c| c > 0.0);
    report.check_coeffs(
        "c_{2k+1} <= 0 for k >= 1",
        &series,
        odd_degrees(3, order),
        |c| c <= MIXED_NONPOSITIVE,
    );
    report.check_coeffs("H1 coefficients >= 0", &h1, 0..=t_order, |c| c >= 0.0);
    report.check_value("H2(0) = 0", h2.coeff(0), 0.0, 1e-12);
    report.check_coeffs("H2 coefficients >= 0", &h2, 1..=t_order, |c| c >= 0.0);
    report.check_value("H3(0) = (4−π)/√2", h3.coeff(0), (4.0 - PI) / sqrt2, 1e-12);
    report.check_value(
        "H3'(0) = (20+9π)/(12√2)",
        h3.coeff(1),
        (20.0 + 9.0 * PI) / (12.0 * sqrt2),
        1e-12,
    );
    report.check_coeffs("H3 coefficients >= 0", &h3, 0..=t_order, |c| c >= 0.0);
    report.check_value(
        "H4(0) = (316−27π)/(108√3)",
        h4.coeff(0),
        (316.0 - 27.0 * PI) / (108.0 * sqrt3),
        1e-12,
    );
    report.check_coeffs("H4 coefficients >= 0", &h4, 0..=t_order, |c| c >= 0.0);
    report.factors = vec![("H1", h1), ("H2", h2), ("H3", h3), ("H4", h4)];
    Ok(report)
}

/// Verifies the mixed series has `c_1 > 0`, `c_{2k+1} ≤ 0` and nonnegative factors.
pub fn check_mixed_signs(order: usize) -> Result<SignReport> {
    mixed_sign_report(order)?.ensure()
}

/// Numeric sign check of the majority series (no proof is claimed).
pub fn majority_sign_report(k: usize, order: usize) -> Result<SignReport> {
    check_series_order(order)?;
    let series = h_maj_series(k, order)?;
    let mut report = SignReport::new("maj", series.clone());
    report.check_coeffs("c1 > 0", &series, std::iter::once(1), |c| c > 0.0);
    report.check_coeffs(
        "c_{2k+1} <= 0 for k >= 1",
        &series,
        odd_degrees(3, order),
        |c| c <= MIXED_NONPOSITIVE,
    );
    Ok(report)
}

// ---------------------------------------------------------------------------

/// Which protocol a correlation function belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorrKind {
    NoComm,
    Majority(usize),
    Orthant(usize),
    Mixed,
}

impl fmt::Display for CorrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrKind::NoComm => write!(f, "nocomm"),
            CorrKind::Majority(k) => write!(f, "maj{k}"),
            CorrKind::Orthant(k) => write!(f, "ort{k}"),
            CorrKind::Mixed => write!(f, "mixed"),
        }
    }
}

/// An odd, monotone map `ρ ↦ E[αβ]` on `[−1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationFunction {
    kind: CorrKind,
}

impl CorrelationFunction {
    pub fn new(kind: CorrKind) -> Result<CorrelationFunction> {
        match kind {
            CorrKind::Majority(k) if k % 2 == 1 => return Err(Error::OddMajority(k)),
            CorrKind::Orthant(k) if k > 2 => {
                return Err(Error::Unsupported(format!("orthant k = {k}")))
            }
            _ => {}
        }
        Ok(CorrelationFunction { kind })
    }

    pub fn kind(&self) -> CorrKind {
        self.kind
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        match self.kind {
            CorrKind::NoComm => h_nocomm(rho),
            CorrKind::Majority(k) => h_maj(k, rho),
            CorrKind::Orthant(k) => h_ort(k, rho),
            CorrKind::Mixed => h_mixed(rho),
        }
    }

    /// Power series about zero through degree `order` (odd, at most 61).
    pub fn series(&self, order: usize) -> Result<Series> {
        check_series_order(order)?;
        match self.kind {
            CorrKind::NoComm | CorrKind::Orthant(0) => Ok(h_nocomm_series(order)),
            CorrKind::Orthant(1) => Ok(h_ort1_series(order)),
            CorrKind::Orthant(_) => h_ort2_series(order),
            CorrKind::Majority(k) => h_maj_series(k, order),
            CorrKind::Mixed => h_mixed_series(order),
        }
    }

    /// Solves `h(x) = y` by bisection; exact at `y = ±1`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let y = check_rho(y)?;
        if y == 1.0 || y == -1.0 || y == 0.0 {
            return Ok(y);
        }
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.eval(mid)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nocomm_values() {
        assert_eq!(h_nocomm(0.0).unwrap(), 0.0);
        assert!((h_nocomm(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((h_nocomm(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(h_nocomm(1.1).is_err());
    }

    #[test]
    fn g_maj_values() {
        for p in [0.0, 0.1, 0.37, 1.0] {
            assert!((g_maj(0, p).unwrap() - (1.0 - 2.0 * p)).abs() < 1e-15);
        }
        assert_eq!(g_maj(2, 0.0).unwrap(), 1.0);
        assert!(g_maj(2, 0.5).unwrap().abs() < 1e-15);
        assert_eq!(g_maj(3, 0.2).unwrap_err(), Error::OddMajority(3));
    }

    #[test]
    fn h_maj_values() {
        for rho in [-0.9, -0.2, 0.0, 0.4, 0.95] {
            let want = 2.0 / PI * f64::asin(rho);
            assert!((h_maj(0, rho).unwrap() - want).abs() < 1e-12);
        }
        for k in [0, 2, 4, 6] {
            assert!((h_maj(k, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(h_maj(2, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn h_ort_values() {
        assert!((h_ort(1, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((h_ort(2, -1.0).unwrap() + 1.0).abs() < 1e-12);
        assert!((h_ort(2, 1.0).unwrap() - 1.0).abs() < 1e-8);
        assert!(h_ort(3, 0.5).is_err());
        let c1 = h_ort2_derivative(0.0).unwrap();
        assert!((c1 - 2.0 * 3f64.sqrt() / PI).abs() < 1e-14);
        assert!((c1 - 1.102657).abs() < 1e-6);
    }

    #[test]
    fn h_ort2_central_difference_matches_integrand() {
        let h = 1e-4;
        let fd = (h_ort(2, h).unwrap() - h_ort(2, -h).unwrap()) / (2.0 * h);
        assert!((fd - 2.0 * 3f64.sqrt() / PI).abs() < 1e-7);
    }

    #[test]
    fn ort2_series_pointwise() {
        let s = h_ort2_series(61).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert!(s.coeff(3) < 0.0);
        for i in 0..=16 {
            let x = -0.8 + 0.1 * i as f64;
            assert!((s.eval(x) - h_ort(2, x).unwrap()).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn series_order_validation() {
        assert!(h_ort2_series(60).is_err());
        assert!(h_ort2_series(63).is_err());
    }

    #[test]
    fn h2_signs_hold() {
        let r = check_h2_coeff_signs(61).unwrap();
        assert!(r.passed());
        let h1 = r.factor("H1").unwrap();
        assert!((h1.coeff(0) - 3f64.powf(-2.5)).abs() < 1e-15);
        assert!((h1.coeff(0) - 0.06415).abs() < 1e-5);
        let h2 = r.factor("H2").unwrap();
        assert!((h2.coeff(0) - 0.6438).abs() < 1e-4);
    }

    #[test]
    fn mixed_constants() {
        let p = mixing_p();
        assert!((p - 0.182405).abs() < 1e-6);
        assert!((h_mixed(1.0).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(h_mixed(0.0).unwrap(), 0.0);
        let r = check_mixed_signs(61).unwrap();
        let h3 = r.factor("H3").unwrap();
        assert!((h3.coeff(0) - 0.6070).abs() < 1e-4);
        let h4 = r.factor("H4").unwrap();
        assert!((h4.coeff(0) - 1.2359).abs() < 1e-4);
    }

    #[test]
    fn b_eps_limits() {
        let eps = 1e-4;
        let ratio = b_eps_analytic(eps).unwrap() / (8.0 * eps / PI);
        assert!((ratio - 1.0).abs() < 0.01);
        assert!((b_eps_analytic(1.0).unwrap() - 2.0).abs() < 1e-15);
        let ideal = b_eps(|x| x, 0.3).unwrap();
        assert!((ideal - 0.6).abs() < 1e-15);
        assert!(b_eps_analytic(0.0).is_err());
    }

    #[test]
    fn invert_round_trip() {
        let h = CorrelationFunction::new(CorrKind::Orthant(2)).unwrap();
        for y in [-0.9, -0.3, 0.2, 0.77] {
            let x = h.invert(y).unwrap();
            assert!((h.eval(x).unwrap() - y).abs() < 1e-12);
        }
        assert_eq!(h.invert(1.0).unwrap(), 1.0);
    }
}
