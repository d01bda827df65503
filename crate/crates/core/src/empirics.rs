//! Standardization of replicate statistics and distances to the normal law.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{normal_cdf, normal_pdf, normal_quantile, normal_sf};

/// Identifies where a set of replicate values came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub dimension: usize,
    pub alpha: f64,
    pub s: f64,
    pub master_seed: u64,
}

/// Replicate values of the statistic at one `(d, alpha, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSampleSet {
    pub meta: SampleMeta,
    pub values: Vec<f64>,
}

impl StatSampleSet {
    pub fn new(meta: SampleMeta, values: Vec<f64>) -> Self {
        Self { meta, values }
    }

    pub fn replicates(&self) -> usize {
        self.values.len()
    }
}

pub fn sample_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance; `NaN` for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = sample_mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizationKind {
    Empirical,
    Theoretical,
}

/// How replicate values are centred and scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Standardization {
    /// Sample mean and sample standard deviation.
    Empirical,
    /// Fixed center and scale.
    Theoretical { center: f64, scale: f64 },
}

impl Standardization {
    /// Centered form for `d = 3`: center `(3/alpha) log s`, scale
    /// `sqrt(variance)` where `variance` is the asymptotic variance at `s`.
    pub fn centered_d3(meta: &SampleMeta, variance: f64) -> Result<Self> {
        if meta.dimension != 3 {
            return Err(Error::UnsupportedDimension { dimension: meta.dimension, minimum: 3 });
        }
        if !(variance > 0.0) {
            return Err(invalid("variance", format!("must be positive, got {variance}")));
        }
        Ok(Self::Theoretical {
            center: 3.0 / meta.alpha * meta.s.ln(),
            scale: variance.sqrt(),
        })
    }

    pub fn kind(&self) -> StandardizationKind {
        match self {
            Self::Empirical => StandardizationKind::Empirical,
            Self::Theoretical { .. } => StandardizationKind::Theoretical,
        }
    }
}

/// Returns `(L - center) / scale` for every replicate.
pub fn standardize(samples: &StatSampleSet, mode: Standardization) -> Result<Vec<f64>> {
    let values = &samples.values;
    let (center, scale) = match mode {
        Standardization::Empirical => {
            if values.len() < 2 {
                return Err(Error::DegenerateSample(format!(
                    "need at least 2 replicates, got {}",
                    values.len()
                )));
            }
            let var = sample_variance(values);
            if !(var > 0.0) {
                return Err(Error::DegenerateSample("zero sample variance".into()));
            }
            (sample_mean(values), var.sqrt())
        }
        Standardization::Theoretical { center, scale } => {
            if !(scale > 0.0 && scale.is_finite()) || !center.is_finite() {
                return Err(invalid("scale", format!("need finite center and positive scale, got {center}, {scale}")));
            }
            (center, scale)
        }
    };
    Ok(values.iter().map(|v| (v - center) / scale).collect())
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(invalid("values", format!("non-finite value {v}")));
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Groups a sorted slice into `(value, count_through_value)`.
fn steps(sorted: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = i + 1,
            _ => out.push((v, i + 1)),
        }
    }
    out
}

/// `sup_t |F_n(t) - Phi(t)|`, checking both one-sided limits at each jump.
pub fn kolmogorov_to_normal(values: &[f64]) -> Result<f64> {
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut before = 0usize;
    let mut sup = 0.0f64;
    for (x, through) in steps(&v) {
        let lo = before as f64 / n;
        let hi = through as f64 / n;
        let below = (normal_cdf(x) - lo).abs();
        // 1 - hi versus the upper tail keeps precision when Phi(x) is near 1.
        let above = ((1.0 - hi) - normal_sf(x)).abs();
        sup = sup.max(below).max(above);
        before = through;
    }
    Ok(sup)
}

/// Antiderivative of `Phi`.
fn int_cdf(t: f64) -> f64 {
    t * normal_cdf(t) + normal_pdf(t)
}

/// Antiderivative of `-(1 - Phi)`, written so that it vanishes at `+inf`.
fn int_sf(t: f64) -> f64 {
    normal_pdf(t) - t * normal_sf(t)
}

/// `int_a^b |c - Phi(t)| dt` for `a < b`.
fn level_gap(a: f64, b: f64, c: f64) -> f64 {
    if a >= 0.0 {
        // Work with 1 - Phi and 1 - c to avoid cancellation in the upper half.
        let c = 1.0 - c;
        let mass = |lo: f64, hi: f64| int_sf(lo) - int_sf(hi);
        let one_side = |lo: f64, hi: f64, above: bool| {
            let m = mass(lo, hi);
            let r = c * (hi - lo);
            if above { m - r } else { r - m }
        };
        if normal_sf(a) <= c {
            one_side(a, b, false)
        } else if normal_sf(b) >= c {
            one_side(a, b, true)
        } else {
            let t = -normal_quantile(c);
            let t = t.clamp(a, b);
            one_side(a, t, true) + one_side(t, b, false)
        }
    } else {
        let mass = |lo: f64, hi: f64| int_cdf(hi) - int_cdf(lo);
        let one_side = |lo: f64, hi: f64, above: bool| {
            let m = mass(lo, hi);
            let r = c * (hi - lo);
            if above { m - r } else { r - m }
        };
        if normal_cdf(b) <= c {
            one_side(a, b, false)
        } else if normal_cdf(a) >= c {
            one_side(a, b, true)
        } else {
            let t = normal_quantile(c).clamp(a, b);
            one_side(a, t, false) + one_side(t, b, true)
        }
    }
}

/// `int |F_n(t) - Phi(t)| dt`, evaluated exactly between jumps.
pub fn wasserstein1_to_normal(values: &[f64]) -> Result<f64> {
    let v = sorted(values)?;
    let n = v.len() as f64;
    let st = steps(&v);
    let first = st[0].0;
    let last = st[st.len() - 1].0;
    let mut total = int_cdf(first) + int_sf(last);
    for w in st.windows(2) {
        let (a, through) = w[0];
        let b = w[1].0;
        total += level_gap(a, b, through as f64 / n);
    }
    Ok(total)
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F_a - G_b|`.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Approximate 95% sampling-noise level `1.36 / sqrt(R)` of a distance
/// computed from `R` replicates.
pub fn noise_floor(replicates: usize) -> f64 {
    1.36 / (replicates as f64).sqrt()
}

/// Distances of a standardized sample to the standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub kolmogorov: f64,
    pub wasserstein1: f64,
    pub standardization: StandardizationKind,
    pub noise_floor: f64,
}

impl DistanceReport {
    pub fn compute(standardized: &[f64], kind: StandardizationKind) -> Result<Self> {
        Ok(Self {
            kolmogorov: kolmogorov_to_normal(standardized)?,
            wasserstein1: wasserstein1_to_normal(standardized)?,
            standardization: kind,
            noise_floor: noise_floor(standardized.len()),
        })
    }
}

/// Ordinary least squares fit `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub residual: f64,
    pub slope_std_error: f64,
    pub points: usize,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, found: n });
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateSample("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_std_error = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(LinearFit {
        slope,
        intercept,
        residual: (sse / nf).sqrt(),
        slope_std_error,
        points: n,
    })
}

/// Fit of `log distance` against `log log s`, with the slope `-(d-2)/2`
/// expected from the asymptotic convergence rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub fit: LinearFit,
    pub expected_slope: f64,
}

/// Regresses `log dist` on `log log s` from `(s, dist)` pairs.
pub fn rate_regression(points: &[(f64, f64)], dimension: usize) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, found: points.len() });
    }
    let mut xy = Vec::with_capacity(points.len());
    for (i, &(s, dist)) in points.iter().enumerate() {
        if !(s > 1.0) {
            return Err(Error::LogDomain { index: i, value: s });
        }
        if !(dist > 0.0) {
            return Err(Error::LogDomain { index: i, value: dist });
        }
        xy.push((s.ln().ln(), dist.ln()));
    }
    Ok(RateFit {
        fit: linear_fit(&xy)?,
        expected_slope: -(dimension as f64 - 2.0) / 2.0,
    })
}
