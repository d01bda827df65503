//! Asymptotic constants for the rooted length statistic and the integrals
//! that define them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_guarded, integrate_unit_cube, Guarded, QuadratureConfig, QuadratureEstimate};
use crate::special::{binomial, factorial, zeta};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must be positive, got {alpha}")))
    }
}

fn check_dimension(d: usize, minimum: usize) -> Result<()> {
    if d < minimum {
        Err(Error::UnsupportedDimension { dimension: d, minimum })
    } else {
        Ok(())
    }
}

/// Coefficient `d / (alpha (d-2)!)` of `log^{d-2} s` in the mean.
pub fn mean_coefficient(d: usize, alpha: f64) -> Result<f64> {
    check_dimension(d, 2)?;
    check_alpha(alpha)?;
    Ok(d as f64 / (alpha * factorial(d - 2)))
}

/// Leading term `d / (alpha (d-2)!) log^{d-2} s` of the mean.
pub fn mean_asymptotic(d: usize, alpha: f64, s: f64) -> Result<f64> {
    let c = mean_coefficient(d, alpha)?;
    if !(s >= 1.0) {
        return Err(invalid("s", format!("must be at least 1, got {s}")));
    }
    Ok(c * s.ln().powi(d as i32 - 2))
}

/// `int_{[0,1]^d} (1 + |b|)^{-2} db` in closed form.
pub fn zeta_square_integral(d: usize) -> Result<f64> {
    check_dimension(d, 1)?;
    Ok(match d {
        1 => 0.5,
        2 => std::f64::consts::LN_2,
        _ => {
            let p = 2f64.powi(d as i32 - 2);
            (p - 1.0) / p * zeta(d as u32 - 1)
        }
    })
}

/// `1/(p+q-pq)^2 - 1/(p+q)^2`, rearranged to avoid cancellation.
#[inline]
fn bracket(p: f64, q: f64) -> f64 {
    let a = p + q;
    let pq = p * q;
    let b = a - pq;
    pq * (a + b) / (a * a * b * b)
}

/// `(a+b)^{-2}`-type integrands are singular at the origin; substituting
/// `b_i = t_i^2` makes the variance of every estimator below finite.
#[inline]
fn squared(t: &[f64], out: &mut [f64]) -> f64 {
    let mut jacobian = 1.0;
    for (o, &x) in out.iter_mut().zip(t) {
        *o = x * x;
        jacobian *= 2.0 * x;
    }
    jacobian
}

const MAX_DIM: usize = 16;

/// `w(d, alpha)` from its defining unit-cube integrals:
/// `d - 2d I_0 + 2 sum_k k C(d,k) I_k`.
pub fn w_constant(d: usize, alpha: f64, config: &QuadratureConfig) -> Result<QuadratureEstimate> {
    check_dimension(d, 2)?;
    check_alpha(alpha)?;
    if d > MAX_DIM {
        return Err(invalid("d", format!("at most {MAX_DIM} supported")));
    }
    let first = integrate_unit_cube(
        |t| {
            let mut b = [0.0; MAX_DIM];
            let jac = squared(t, &mut b[..d]);
            let vol: f64 = b[..d].iter().product();
            jac * b[0].powf(alpha) / ((1.0 + vol) * (1.0 + vol))
        },
        d,
        &config.derived(0),
    )?;
    let mut terms = vec![(-2.0 * d as f64, first)];
    for k in 1..d {
        let est = integrate_guarded(
            |t| {
                let mut b = [0.0; MAX_DIM];
                let jac = squared(t, &mut b[..d]);
                let p: f64 = b[..k].iter().product();
                let q: f64 = b[k..d].iter().product();
                Guarded {
                    value: jac * b[0].powf(alpha) * bracket(p, q),
                    guard: p + q - p * q,
                }
            },
            d,
            &config.derived(k as u64),
        )?;
        terms.push((2.0 * k as f64 * binomial(d, k), est));
    }
    Ok(QuadratureEstimate::linear_combination(d as f64, &terms))
}

/// `w(d, alpha)` recovered from the reduced form of the variance coefficient,
/// `d/(2 alpha (d-2)!) - gamma + 2 sum_k k C(d,k) h_k`, multiplied by
/// `2 alpha (d-2)!`. The integrals are over two or three variables instead of
/// `d`, so this is an independent route to the same constant.
pub fn w_constant_alt(d: usize, alpha: f64, config: &QuadratureConfig) -> Result<QuadratureEstimate> {
    check_dimension(d, 3)?;
    check_alpha(alpha)?;
    let fact_d2 = factorial(d - 2);

    // gamma * 2 alpha (d-2)! = 2d * int v1^a (1 + v1 v2)^{-2} (-log v2)^{d-2}/(d-2)!
    let gamma_part = integrate_unit_cube(
        |t| {
            let (v1, v2) = (t[0], t[1]);
            v1.powf(alpha) / (1.0 + v1 * v2).powi(2) * (-v2.ln()).powi(d as i32 - 2) / fact_d2
        },
        2,
        &config.derived(100),
    )?;
    let mut terms = vec![(-2.0 * d as f64, gamma_part)];

    // h_1 * 2 alpha (d-2)!
    let h1 = integrate_guarded(
        |t| {
            let (w1, w2) = (t[0] * t[0], t[1] * t[1]);
            let jac = 4.0 * t[0] * t[1];
            Guarded {
                value: jac * w1.powf(alpha) * bracket(w1, w2) * (-w2.ln()).powi(d as i32 - 2) / fact_d2,
                guard: w1 + w2 - w1 * w2,
            }
        },
        2,
        &config.derived(101),
    )?;
    terms.push((2.0 * d as f64, h1));

    // h_k * 2 alpha (d-2)!, k >= 2: u1^{alpha-1} du1 = dt/alpha with
    // u1 = t^{1/alpha}; the region w1 > u1 is rejected.
    for k in 2..d {
        let fact_k2 = factorial(k - 2);
        let fact_rest = factorial(d - k - 1);
        let hk = integrate_guarded(
            |t| {
                let u1 = t[0].powf(1.0 / alpha);
                let (w1, w2) = (t[1] * t[1], t[2] * t[2]);
                if w1 > u1 {
                    return Guarded { value: 0.0, guard: f64::INFINITY };
                }
                let jac = 4.0 * t[1] * t[2] / alpha;
                let inner = (u1 / w1).ln().powi(k as i32 - 2) / fact_k2;
                let outer = (-w2.ln()).powi((d - k - 1) as i32) / fact_rest;
                Guarded {
                    value: jac * bracket(w1, w2) * inner * outer,
                    guard: w1 + w2 - w1 * w2,
                }
            },
            3,
            &config.derived(100 + k as u64),
        )?;
        terms.push((2.0 * k as f64 * binomial(d, k), hk));
    }
    Ok(QuadratureEstimate::linear_combination(d as f64, &terms))
}

/// Lower bound on `w(d, alpha)`: `d 2^d/(alpha+1) ((2^d-1)/2^d - zeta_square_integral(d))`.
pub fn w_lower_bound(d: usize, alpha: f64) -> Result<f64> {
    check_dimension(d, 2)?;
    check_alpha(alpha)?;
    let p = 2f64.powi(d as i32);
    Ok(d as f64 * p / (alpha + 1.0) * ((p - 1.0) / p - zeta_square_integral(d)?))
}

/// Evaluated asymptotic coefficients at one `(d, alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub dimension: usize,
    pub alpha: f64,
    pub mean_coefficient: f64,
    pub w_value: QuadratureEstimate,
    /// Present for `d >= 3`, where the reduced form applies.
    pub w_alt_value: Option<QuadratureEstimate>,
    pub variance_coefficient: f64,
}

impl TheoryConstants {
    pub fn evaluate(d: usize, alpha: f64, config: &QuadratureConfig) -> Result<Self> {
        let mean_coefficient = mean_coefficient(d, alpha)?;
        let w_value = w_constant(d, alpha, config)?;
        let w_alt_value = if d >= 3 {
            Some(w_constant_alt(d, alpha, &config.derived(u64::MAX))?)
        } else {
            None
        };
        Ok(Self {
            dimension: d,
            alpha,
            mean_coefficient,
            w_value,
            w_alt_value,
            variance_coefficient: w_value.value / (2.0 * alpha * factorial(d - 2)),
        })
    }

    /// Standard error of the variance coefficient.
    pub fn variance_coefficient_std_error(&self) -> f64 {
        self.w_value.std_error / (2.0 * self.alpha * factorial(self.dimension - 2))
    }

    pub fn key(&self) -> String {
        format!("d={},alpha={}", self.dimension, self.alpha)
    }
}

/// Constants keyed by `d=<d>,alpha=<alpha>`.
pub fn constants_table(constants: &[TheoryConstants]) -> BTreeMap<String, TheoryConstants> {
    constants.iter().map(|c| (c.key(), c.clone())).collect()
}

/// Leading term `w / (2 alpha (d-2)!) log^{d-2} s` of the variance.
pub fn variance_asymptotic(d: usize, alpha: f64, s: f64, constants: &TheoryConstants) -> Result<f64> {
    check_dimension(d, 3)?;
    check_alpha(alpha)?;
    if constants.dimension != d || constants.alpha != alpha {
        return Err(invalid(
            "constants",
            format!(
                "evaluated for d = {}, alpha = {}, requested d = {d}, alpha = {alpha}",
                constants.dimension, constants.alpha
            ),
        ));
    }
    if !(s >= 1.0) {
        return Err(invalid("s", format!("must be at least 1, got {s}")));
    }
    Ok(constants.variance_coefficient * s.ln().powi(d as i32 - 2))
}

/// `c_{beta,s}(y) = s int 1{x > y} exp(-beta s |x|) dx` over the dominating
/// box. Coordinates with `y_i > 0` are sampled log-uniformly on `(y_i, 1]`,
/// which keeps the integrand bounded.
pub fn c_beta_s(y: &[f64], beta: f64, s: f64, config: &QuadratureConfig) -> Result<QuadratureEstimate> {
    check_dimension(y.len(), 1)?;
    if let Some(&v) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::CoordinateOutOfRange { index: 0, value: v });
    }
    if !(beta > 0.0) || !(s > 0.0) {
        return Err(invalid("beta/s", "must be positive"));
    }
    if y.len() > MAX_DIM {
        return Err(invalid("y", format!("at most {MAX_DIM} coordinates supported")));
    }
    if y.iter().any(|&v| v >= 1.0) {
        return Ok(QuadratureEstimate::exact(0.0));
    }
    let logs: Vec<f64> = y.iter().map(|v| if *v > 0.0 { v.ln() } else { 0.0 }).collect();
    integrate_unit_cube(
        |t| {
            let mut vol = 1.0;
            let mut jac = 1.0;
            for ((&ti, &yi), &ly) in t.iter().zip(y).zip(&logs) {
                if yi > 0.0 {
                    let x = (ly * (1.0 - ti)).exp();
                    vol *= x;
                    jac *= -ly * x;
                } else {
                    vol *= ti;
                }
            }
            s * jac * (-beta * s * vol).exp()
        },
        y.len(),
        config,
    )
}

/// Shape of the upper bound on `c_{beta,s}`:
/// `beta^{-1} exp(-beta s |y|/2) (1 + |log(beta s |y|)|^{d-1})`.
pub fn c_bound_shape(y: &[f64], beta: f64, s: f64) -> f64 {
    let d = y.len() as i32;
    let v = beta * s * y.iter().product::<f64>();
    (-v / 2.0).exp() * (1.0 + v.ln().abs().powi(d - 1)) / beta
}

/// Parameters of the weighted minimal-point integral
/// `s int prod_{i<=k} x_i^{alpha_i} (s|x|)^tau |log(nu s|x|)|^delta exp(-beta s|x|) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedIntegral {
    pub dimension: usize,
    /// One exponent per weighted coordinate; `k = alphas.len()`.
    pub alphas: Vec<f64>,
    pub tau: f64,
    pub delta: f64,
    pub nu: f64,
    pub beta: f64,
    pub s: f64,
}

impl WeightedIntegral {
    /// `alphas = [1; k]`, `tau = delta = 0`, `nu = beta = 1`.
    pub fn simple(dimension: usize, k: usize, s: f64) -> Self {
        Self {
            dimension,
            alphas: vec![1.0; k],
            tau: 0.0,
            delta: 0.0,
            nu: 1.0,
            beta: 1.0,
            s,
        }
    }

    fn validate(&self) -> Result<()> {
        check_dimension(self.dimension, 2)?;
        if self.dimension > MAX_DIM {
            return Err(invalid("dimension", format!("at most {MAX_DIM} supported")));
        }
        let k = self.alphas.len();
        if k == 0 || k > self.dimension {
            return Err(invalid("alphas", format!("need between 1 and d = {} exponents", self.dimension)));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(invalid("alphas", "exponents must be positive"));
        }
        if !(self.tau > -1.0) {
            return Err(invalid("tau", format!("integral diverges for tau = {} <= -1", self.tau)));
        }
        if !(self.delta >= 0.0) {
            return Err(invalid("delta", "must be non-negative"));
        }
        if !(self.nu > 0.0) || !(self.beta > 0.0) {
            return Err(invalid("nu/beta", "must be positive"));
        }
        if !(self.s > 1.0) {
            return Err(invalid("s", format!("must exceed 1, got {}", self.s)));
        }
        Ok(())
    }

    /// Evaluates the integrand at `x` directly (no change of variables).
    pub fn integrand(&self, x: &[f64]) -> f64 {
        let vol: f64 = x.iter().product();
        let weights: f64 = self.alphas.iter().zip(x).map(|(a, xi)| xi.powf(*a)).product();
        let sv = self.s * vol;
        let log_term = if self.delta == 0.0 {
            1.0
        } else {
            (self.nu * sv).ln().abs().powf(self.delta)
        };
        self.s * weights * sv.powf(self.tau) * log_term * (-self.beta * sv).exp()
    }
}

/// Estimates the weighted integral by importance sampling in logarithmic
/// coordinates (see [`log_simplex_integral`]).
pub fn weighted_minimal_integral(params: &WeightedIntegral, config: &QuadratureConfig) -> Result<QuadratureEstimate> {
    params.validate()?;
    let log_s = params.s.ln();
    let p = params.clone();
    log_simplex_integral(
        params.dimension,
        (params.beta * params.s).ln(),
        0.5 * (1.0 + params.tau).min(1.0),
        config,
        move |total, e| {
            let weighted: f64 = p.alphas.iter().zip(e).map(|(a, ei)| a * ei).sum();
            let log_sv = log_s - total;
            let mut log_value = log_s + p.tau * log_sv - p.beta * log_sv.exp() - weighted;
            if p.delta != 0.0 {
                log_value += p.delta * (p.nu.ln() + log_sv).abs().ln();
            }
            log_value
        },
    )
}

/// Exact mean `s int ||x||^alpha exp(-s|x|) dx` of the statistic at finite
/// `s`: a point at `x` is minimal exactly when the box `[0, x]` is empty.
pub fn mean_finite(d: usize, alpha: f64, s: f64, config: &QuadratureConfig) -> Result<QuadratureEstimate> {
    check_dimension(d, 2)?;
    check_alpha(alpha)?;
    if d > MAX_DIM {
        return Err(invalid("d", format!("at most {MAX_DIM} supported")));
    }
    if !(s > 1.0) || !s.is_finite() {
        return Err(invalid("s", format!("must exceed 1, got {s}")));
    }
    let log_s = s.ln();
    log_simplex_integral(d, log_s, 0.5, config, move |total, e| {
        let sq: f64 = e.iter().map(|ei| (-2.0 * ei).exp()).sum();
        log_s + 0.5 * alpha * sq.ln() - (log_s - total).exp()
    })
}

/// `int_{[0,1]^d} f(x) dx` for integrands concentrated near the hyperbola
/// `|x| = 1/scale`, with `log f` supplied as a function of the total
/// `T = sum E_i` and the vector `E` where `x_i = exp(-E_i)`.
///
/// The `E_i` are i.i.d. standard exponentials under Lebesgue measure. The
/// proposal draws `T` from an equal mixture of a uniform law on `[0, L]` and
/// an exponential tail of rate `tail_rate` beyond `L`, where `L` sits just
/// past `log scale`, and the direction `E / T` uniformly from the simplex.
/// Plain sampling of the cube would essentially never reach the relevant
/// region for large scales.
fn log_simplex_integral<F>(
    d: usize,
    log_scale: f64,
    tail_rate: f64,
    config: &QuadratureConfig,
    log_f: F,
) -> Result<QuadratureEstimate>
where
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    let upper = log_scale.max(0.0) + 3.0;
    let log_fact = factorial(d - 1).ln();
    integrate_unit_cube(
        move |t| {
            let (total, log_density) = if t[0] < 0.5 {
                (2.0 * t[0] * upper, (0.5 / upper).ln())
            } else {
                let excess = -(2.0 * (1.0 - t[0])).ln() / tail_rate;
                (upper + excess, (0.5 * tail_rate).ln() - tail_rate * excess)
            };
            let mut cuts = [0.0; MAX_DIM + 1];
            cuts[..d - 1].copy_from_slice(&t[1..d]);
            cuts[..d - 1].sort_unstable_by(f64::total_cmp);
            cuts[d - 1] = 1.0;
            let mut e = [0.0; MAX_DIM];
            let mut previous = 0.0;
            for (ei, &c) in e.iter_mut().zip(&cuts[..d]) {
                *ei = total * (c - previous);
                previous = c;
            }
            let log_weight = -total + (d as f64 - 1.0) * total.ln() - log_fact - log_density;
            (log_f(total, &e[..d]) + log_weight).exp()
        },
        d,
        config,
    )
}
