//! Monte Carlo integration over the unit cube.
//!
//! The evaluation budget is split into fixed-size chunks, chunk `c` drawing
//! from the stream `derive_seed(seed, c)`. Chunk statistics are merged in
//! chunk order, so an estimate depends on the seed and the budget only.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::sampling::{derive_seed, open_unit, stream};

const CHUNK: u64 = 1 << 16;
const RANDOM_SHIFTS: u64 = 16;
/// Largest admissible fraction of discarded evaluations.
pub const MAX_DISCARDED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    PlainMC,
    /// Randomly shifted Kronecker lattice; the error bar comes from the
    /// spread across independent shifts.
    LowDiscrepancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub evaluations: u64,
    pub method: Method,
    pub seed: u64,
    /// Evaluations whose guard expression falls below this are discarded.
    pub singularity_floor: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            evaluations: 10_000_000,
            method: Method::PlainMC,
            seed: 0,
            singularity_floor: 0.0,
            execution: Execution::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn new(evaluations: u64, seed: u64) -> Self {
        Self {
            evaluations,
            seed,
            ..Self::default()
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Same settings with a seed derived for sub-integral `index`.
    pub fn derived(&self, index: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, index),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub evaluations: u64,
    pub method: Method,
    pub discarded_fraction: f64,
}

impl QuadratureEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            evaluations: 1,
            method: Method::PlainMC,
            discarded_fraction: 0.0,
        }
    }

    /// `sum_i c_i X_i` for independent estimates, errors added in quadrature.
    pub fn linear_combination(offset: f64, terms: &[(f64, QuadratureEstimate)]) -> Self {
        let value = offset + terms.iter().map(|(c, e)| c * e.value).sum::<f64>();
        let variance: f64 = terms.iter().map(|(c, e)| (c * e.std_error).powi(2)).sum();
        let evaluations = terms.iter().map(|(_, e)| e.evaluations).sum::<u64>().max(1);
        let discarded = terms
            .iter()
            .map(|(_, e)| e.discarded_fraction)
            .fold(0.0, f64::max);
        Self {
            value,
            std_error: variance.sqrt(),
            evaluations,
            method: terms.first().map_or(Method::PlainMC, |(_, e)| e.method),
            discarded_fraction: discarded,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            ..*self
        }
    }

    /// Distance between two independent estimates in combined standard errors.
    pub fn z_score(&self, other: &QuadratureEstimate) -> f64 {
        let combined = self.std_error.hypot(other.std_error);
        if combined == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / combined
        }
    }
}

/// One integrand evaluation: its value and the expression compared against
/// the singularity floor.
#[derive(Debug, Clone, Copy)]
pub struct Guarded {
    pub value: f64,
    pub guard: f64,
}

/// Integrates `f` over `[0, 1]^k`.
pub fn integrate_unit_cube<F>(f: F, k: usize, config: &QuadratureConfig) -> Result<QuadratureEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_guarded(
        |b| Guarded {
            value: f(b),
            guard: f64::INFINITY,
        },
        k,
        config,
    )
}

/// Integrates a guarded integrand; evaluations with `guard < floor` count as
/// zero and their share of the budget is reported.
pub fn integrate_guarded<F>(f: F, k: usize, config: &QuadratureConfig) -> Result<QuadratureEstimate>
where
    F: Fn(&[f64]) -> Guarded + Sync,
{
    if k == 0 {
        return Err(Error::UnsupportedDimension {
            dimension: 0,
            minimum: 1,
        });
    }
    if config.evaluations == 0 {
        return Err(invalid("evaluations", "must be positive"));
    }
    if !(config.singularity_floor >= 0.0) {
        return Err(invalid("singularity_floor", "must be non-negative"));
    }
    let estimate = match config.method {
        Method::PlainMC => plain_mc(&f, k, config)?,
        Method::LowDiscrepancy => shifted_lattice(&f, k, config)?,
    };
    if estimate.discarded_fraction >= MAX_DISCARDED_FRACTION {
        return Err(Error::DiscardedMeasure {
            fraction: estimate.discarded_fraction,
        });
    }
    Ok(estimate)
}

/// Running mean and centred second moment; merged with Chan's update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    discarded: u64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let wb = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * wb,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * wb,
            discarded: self.discarded + other.discarded,
        }
    }
}

#[inline]
fn accept(g: Guarded, floor: f64, point: &[f64]) -> Result<Option<f64>> {
    if g.guard < floor {
        return Ok(None);
    }
    if !g.value.is_finite() {
        return Err(Error::IntegrationFailure {
            point: point.to_vec(),
            value: g.value,
        });
    }
    Ok(Some(g.value))
}

fn plain_mc<F>(f: &F, k: usize, config: &QuadratureConfig) -> Result<QuadratureEstimate>
where
    F: Fn(&[f64]) -> Guarded + Sync,
{
    let total = config.evaluations;
    let chunks = total.div_ceil(CHUNK);
    let partials = map_indexed(config.execution, chunks as usize, |c| {
        let c = c as u64;
        let len = CHUNK.min(total - c * CHUNK);
        let mut rng = stream(derive_seed(config.seed, c));
        let mut point = vec![0.0; k];
        let mut m = Moments::default();
        for _ in 0..len {
            for x in point.iter_mut() {
                *x = open_unit(&mut rng);
            }
            match accept(f(&point), config.singularity_floor, &point)? {
                Some(v) => m.push(v),
                None => {
                    m.push(0.0);
                    m.discarded += 1;
                }
            }
        }
        Ok(m)
    });
    let mut merged = Moments::default();
    for p in partials {
        merged = merged.merge(p?);
    }
    let n = merged.count as f64;
    let sd = if merged.count > 1 {
        (merged.m2.max(0.0) / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(QuadratureEstimate {
        value: merged.mean,
        std_error: sd / n.sqrt(),
        evaluations: merged.count,
        method: Method::PlainMC,
        discarded_fraction: merged.discarded as f64 / n,
    })
}

/// Generator of the `k`-dimensional Kronecker sequence: powers of the inverse
/// of the unique positive root of `x^(k+1) = x + 1`.
fn kronecker_generator(k: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (k as f64 + 1.0));
    }
    (1..=k).map(|j| phi.powi(-(j as i32)).fract()).collect()
}

fn shifted_lattice<F>(f: &F, k: usize, config: &QuadratureConfig) -> Result<QuadratureEstimate>
where
    F: Fn(&[f64]) -> Guarded + Sync,
{
    let per_shift = (config.evaluations / RANDOM_SHIFTS).max(1);
    let generator = kronecker_generator(k);
    let partials = map_indexed(config.execution, RANDOM_SHIFTS as usize, |r| {
        let mut rng = stream(derive_seed(config.seed, r as u64));
        let shift: Vec<f64> = (0..k).map(|_| open_unit(&mut rng)).collect();
        let mut point = vec![0.0; k];
        let mut m = Moments::default();
        for i in 1..=per_shift {
            for ((x, g), s) in point.iter_mut().zip(&generator).zip(&shift) {
                let mut v = (s + (i as f64) * g).fract();
                if v == 0.0 {
                    v = f64::EPSILON;
                }
                *x = v;
            }
            match accept(f(&point), config.singularity_floor, &point)? {
                Some(v) => m.push(v),
                None => {
                    m.push(0.0);
                    m.discarded += 1;
                }
            }
        }
        Ok(m)
    });
    let mut shift_means = Moments::default();
    let mut discarded = 0;
    for p in partials {
        let p = p?;
        discarded += p.discarded;
        shift_means.push(p.mean);
    }
    let r = RANDOM_SHIFTS as f64;
    let sd = (shift_means.m2.max(0.0) / (r - 1.0)).sqrt();
    let evaluations = per_shift * RANDOM_SHIFTS;
    Ok(QuadratureEstimate {
        value: shift_means.mean,
        std_error: sd / r.sqrt(),
        evaluations,
        method: Method::LowDiscrepancy,
        discarded_fraction: discarded as f64 / evaluations as f64,
    })
}
