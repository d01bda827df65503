//! Special functions used across the crate.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut i = 1;
    while i < 21 {
        table[i] = table[i - 1] * i as u64;
        i += 1;
    }
    table
};

/// Exact `n!` for `n <= 20`; the gamma function beyond that.
pub fn factorial(n: usize) -> f64 {
    match FACTORIALS.get(n) {
        Some(&v) => v as f64,
        None => gamma(n as f64 + 1.0),
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Lanczos-class gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate far into the right tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`, polished with two Newton steps.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = std::f64::consts::SQRT_2 * statrs::function::erf::erf_inv(2.0 * p - 1.0);
    for _ in 0..2 {
        let density = normal_pdf(x);
        if density <= 0.0 || !x.is_finite() {
            break;
        }
        let residual = if p < 0.5 {
            normal_cdf(x) - p
        } else {
            (1.0 - p) - normal_sf(x)
        };
        x -= residual / density;
    }
    x
}

/// Riemann zeta function for integer arguments `n >= 2`, via Euler–Maclaurin
/// summation. Absolute error is below 1e-15.
pub fn zeta(n: u32) -> f64 {
    assert!(n >= 2, "zeta diverges at n = {n}");
    const N: usize = 64;
    let s = f64::from(n);
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    let big_n = N as f64;
    // Tail from N: integral, half endpoint and Bernoulli corrections.
    let mut tail = big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s);
    // B_{2j} / (2j)! coefficients.
    let bernoulli = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut power = big_n.powf(-s - 1.0);
    for (j, b) in bernoulli.iter().enumerate() {
        tail += b * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= big_n * big_n;
    }
    head + tail
}
