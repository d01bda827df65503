//! Seeded point-process and Dickman samplers.
//!
//! All randomness flows from 64-bit seeds through [`derive_seed`], so any
//! replicate can be regenerated in isolation from `(master_seed, index)`.

use rand::{Rng, SeedableRng};
use rand_distr::Exp1;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::PointSample;
use crate::special::ln_gamma;

/// The generator behind every stream.
pub type StreamRng = Xoshiro256PlusPlus;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes `(master, index)` into the seed of an independent stream.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let a = mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15));
    mix64(a ^ mix64(index.wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(1)))
}

/// Seed of replicate `replicate` at intensity `s`: depends only on the
/// master seed, `s` and the replicate index.
pub fn replicate_seed(master: u64, s: f64, replicate: u64) -> u64 {
    derive_seed(derive_seed(master, s.to_bits()), replicate)
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Uniform draw on the open interval `(0, 1)`.
#[inline]
pub fn open_unit(rng: &mut impl Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    Poisson,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dimension: usize,
    /// Intensity `s` for Poisson, point count `n` for Binomial.
    pub intensity_or_count: f64,
    pub master_seed: u64,
    pub process_kind: ProcessKind,
}

impl SamplerConfig {
    pub fn poisson(dimension: usize, intensity: f64, master_seed: u64) -> Self {
        Self {
            dimension,
            intensity_or_count: intensity,
            master_seed,
            process_kind: ProcessKind::Poisson,
        }
    }

    pub fn binomial(dimension: usize, count: usize, master_seed: u64) -> Self {
        Self {
            dimension,
            intensity_or_count: count as f64,
            master_seed,
            process_kind: ProcessKind::Binomial,
        }
    }

    fn check_dimension(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(crate::Error::UnsupportedDimension {
                dimension: 0,
                minimum: 1,
            });
        }
        Ok(())
    }
}

/// Poisson process with intensity `s` times Lebesgue measure on `[0, 1]^d`,
/// returned in lexicographic order.
pub fn sample_poisson_cube(config: &SamplerConfig) -> Result<PointSample> {
    let points = poisson_stream(config)?;
    Ok(collect(points, config.dimension, config.intensity_or_count, config.master_seed))
}

/// Exactly `n` i.i.d. uniform points on `[0, 1]^d`, in lexicographic order.
pub fn sample_binomial_cube(config: &SamplerConfig) -> Result<PointSample> {
    config.check_dimension()?;
    if config.process_kind != ProcessKind::Binomial {
        return Err(invalid("process_kind", "expected Binomial"));
    }
    let n = config.intensity_or_count;
    if !(n >= 1.0) || n.fract() != 0.0 || !n.is_finite() {
        return Err(invalid("count", format!("must be a positive integer, got {n}")));
    }
    let points = LexUniformStream::new(config.dimension, n as usize, config.master_seed);
    Ok(collect(points, config.dimension, n, config.master_seed))
}

/// `n` i.i.d. uniform points produced one at a time in lexicographic order.
///
/// The first coordinates are the order statistics of `n` uniforms, built
/// from normalized exponential spacings: a first pass over a cloned stream
/// sums the `n + 1` spacings, the second pass replays them. The remaining
/// coordinates come from a separate stream. Nothing is sorted or stored.
///
/// A first coordinate that fails to increase under rounding is nudged up by
/// one ulp, which keeps the points distinct and strictly ordered.
#[derive(Debug, Clone)]
pub struct LexUniformStream {
    dimension: usize,
    remaining: usize,
    spacing: StreamRng,
    coords: StreamRng,
    cumulative: f64,
    total: f64,
    last: f64,
}

impl LexUniformStream {
    pub fn new(dimension: usize, n: usize, seed: u64) -> Self {
        let spacing = stream(derive_seed(seed, 1));
        let mut probe = spacing.clone();
        let total: f64 = (0..=n).map(|_| probe.sample::<f64, _>(Exp1)).sum();
        Self {
            dimension,
            remaining: n,
            spacing,
            coords: stream(derive_seed(seed, 2)),
            cumulative: 0.0,
            total,
            last: 0.0,
        }
    }

    /// Number of points still to come.
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    /// Writes the next point into `out[..dimension]`.
    pub fn next_into(&mut self, out: &mut [f64]) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        self.cumulative += self.spacing.sample::<f64, _>(Exp1);
        let mut x = (self.cumulative / self.total).min(ONE_BELOW);
        if x <= self.last {
            x = self.last.next_up();
        }
        self.last = x;
        out[0] = x;
        for c in &mut out[1..self.dimension] {
            *c = open_unit(&mut self.coords);
        }
        true
    }
}

const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// Draws the Poisson count for `config` and returns the point stream.
pub fn poisson_stream(config: &SamplerConfig) -> Result<LexUniformStream> {
    config.check_dimension()?;
    if config.process_kind != ProcessKind::Poisson {
        return Err(invalid("process_kind", "expected Poisson"));
    }
    let s = config.intensity_or_count;
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid("intensity", format!("must be positive, got {s}")));
    }
    let n = poisson_count(&mut stream(config.master_seed), s) as usize;
    Ok(LexUniformStream::new(config.dimension, n, config.master_seed))
}

fn collect(mut points: LexUniformStream, d: usize, intensity: f64, seed: u64) -> PointSample {
    let mut coords = vec![0.0; points.remaining() * d];
    for row in coords.chunks_exact_mut(d) {
        points.next_into(row);
    }
    PointSample::from_sorted_unchecked(d, coords, intensity, seed)
}

/// Exact Poisson variate: sequential inversion below 30, Hörmann's
/// transformed rejection (PTRS) above.
pub fn poisson_count(rng: &mut impl Rng, lambda: f64) -> u64 {
    if lambda < 30.0 {
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        let u = open_unit(rng);
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        return k;
    }
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = open_unit(rng) - 0.5;
        let v = open_unit(rng);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= -lambda + k * loglam - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickmanSamplerConfig {
    /// The cascade stops after the first running product below this value.
    pub truncation_threshold: f64,
    pub seed: u64,
}

impl DickmanSamplerConfig {
    pub const DEFAULT_THRESHOLD: f64 = 1e-12;

    pub fn new(seed: u64) -> Self {
        Self {
            truncation_threshold: Self::DEFAULT_THRESHOLD,
            seed,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.truncation_threshold = threshold;
        self
    }
}

/// Standard Dickman variates `sum_i prod_{j <= i} U_j`.
///
/// Sample `i` draws from its own stream, so changing the threshold only
/// lengthens or shortens each cascade without shifting other samples. The
/// first product below the threshold is still added, which bounds the
/// expected truncation bias by the threshold.
pub fn sample_dickman(config: &DickmanSamplerConfig, count: usize) -> Result<Vec<f64>> {
    let t = config.truncation_threshold;
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid("truncation_threshold", format!("must lie in (0, 1), got {t}")));
    }
    if count == 0 {
        return Err(invalid("count", "must be at least 1"));
    }
    Ok((0..count as u64)
        .map(|i| dickman_cascade(&mut stream(derive_seed(config.seed, i)), t))
        .collect())
}

/// Sums of `summands` independent standard Dickman variates (the
/// generalized Dickman law with parameter `summands`).
pub fn sample_dickman_sum(
    config: &DickmanSamplerConfig,
    count: usize,
    summands: usize,
) -> Result<Vec<f64>> {
    if summands == 0 {
        return Err(invalid("summands", "must be at least 1"));
    }
    let per_term: Vec<Vec<f64>> = (0..summands as u64)
        .map(|j| sample_dickman(&DickmanSamplerConfig { seed: derive_seed(config.seed, u64::MAX - j), ..*config }, count))
        .collect::<Result<_>>()?;
    Ok((0..count).map(|i| per_term.iter().map(|t| t[i]).sum()).collect())
}

fn dickman_cascade(rng: &mut StreamRng, threshold: f64) -> f64 {
    let mut product = 1.0;
    let mut sum = 0.0;
    loop {
        product *= open_unit(rng);
        sum += product;
        if product < threshold {
            return sum;
        }
    }
}
