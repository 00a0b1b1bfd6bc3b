//! Independent reference computations used only by the integration tests.
#![allow(dead_code)]

/// Compositional inverse by Lagrange inversion:
/// `d_n = (1/n)·[x^{n−1}] (x / h(x))^n`, computed with plain vectors so it
/// shares no code with the library's reversion.
pub fn lagrange_inverse(h: &[f64], order: usize) -> Vec<f64> {
    assert!(h.len() > 1 && h[0] == 0.0 && h[1] != 0.0);
    // q(x) = h(x)/x
    let q: Vec<f64> = (0..order)
        .map(|i| h.get(i + 1).copied().unwrap_or(0.0))
        .collect();
    // r = 1/q
    let mut r = vec![0.0; order];
    r[0] = 1.0 / q[0];
    for i in 1..order {
        let s: f64 = (1..=i).map(|j| q[j] * r[i - j]).sum();
        r[i] = -s / q[0];
    }
    let mut out = vec![0.0; order + 1];
    let mut power = vec![0.0; order];
    power[0] = 1.0;
    for n in 1..=order {
        power = mul(&power, &r, order);
        out[n] = power[n - 1] / n as f64;
    }
    out
}

fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Evaluates `Σ c_k x^k` naively.
pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, ck)| ck * x.powi(k as i32))
        .sum()
}

/// `v^{⊗k}` as an explicit Kronecker power of length `n^k`.
pub fn kron_power(v: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|x| v.iter().map(move |y| x * y))
            .collect();
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Grid of `points` evenly spaced values on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}
