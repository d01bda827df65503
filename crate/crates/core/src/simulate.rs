//! One replicate of the rooted length statistic, computed while the points
//! are generated.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::{map_indexed, Execution};
use crate::model::{alpha_norm, check_alpha, minimal_points_fast, rooted_alpha_length_of, Staircase};
use crate::sampling::{
    poisson_stream, replicate_seed, sample_binomial_cube, sample_poisson_cube, LexUniformStream, ProcessKind, SamplerConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub n_points: u64,
    pub n_minimal: u64,
    pub statistic: f64,
}

/// Samples the process described by `config` and returns the point count,
/// the number of minimal points and `L^alpha`.
///
/// For `d <= 3` the minima are found in a single sweep over the point stream
/// without storing the sample. The result is identical to sampling with
/// [`sample_poisson_cube`] (or [`sample_binomial_cube`]) and applying
/// [`crate::model::rooted_alpha_length`].
pub fn simulate_replicate(config: &SamplerConfig, alpha: f64) -> Result<ReplicateOutcome> {
    check_alpha(alpha)?;
    if config.dimension <= 3 {
        let points = match config.process_kind {
            ProcessKind::Poisson => poisson_stream(config)?,
            ProcessKind::Binomial => {
                let n = config.intensity_or_count;
                if !(n >= 1.0) || n.fract() != 0.0 || !n.is_finite() {
                    return Err(invalid("count", format!("must be a positive integer, got {n}")));
                }
                LexUniformStream::new(config.dimension, n as usize, config.master_seed)
            }
        };
        return Ok(sweep(points, config.dimension, alpha));
    }
    let sample = match config.process_kind {
        ProcessKind::Poisson => sample_poisson_cube(config)?,
        ProcessKind::Binomial => sample_binomial_cube(config)?,
    };
    let minimal = minimal_points_fast(&sample);
    Ok(ReplicateOutcome {
        n_points: sample.len() as u64,
        n_minimal: minimal.len() as u64,
        statistic: rooted_alpha_length_of(&sample, &minimal, alpha),
    })
}

/// Replicates `indices` at intensity `s`, each seeded by
/// [`replicate_seed`]. Output order follows `indices` for every execution
/// strategy.
pub fn simulate_replicates(
    template: &SamplerConfig,
    alpha: f64,
    indices: &[u64],
    execution: Execution,
) -> Result<Vec<ReplicateOutcome>> {
    let s = template.intensity_or_count;
    map_indexed(execution, indices.len(), |i| {
        let config = SamplerConfig {
            master_seed: replicate_seed(template.master_seed, s, indices[i]),
            ..*template
        };
        simulate_replicate(&config, alpha)
    })
    .into_iter()
    .collect()
}

fn sweep(mut points: LexUniformStream, d: usize, alpha: f64) -> ReplicateOutcome {
    let n_points = points.remaining() as u64;
    let mut p = [0.0f64; 3];
    let mut n_minimal = 0u64;
    let mut statistic = 0.0;
    let mut lowest = f64::INFINITY;
    let mut stairs = Staircase::new();
    while points.next_into(&mut p) {
        let minimal = match d {
            1 => n_minimal == 0,
            2 => {
                let m = p[1] < lowest;
                if m {
                    lowest = p[1];
                }
                m
            }
            _ => stairs.insert(p[1], p[2]),
        };
        if minimal {
            n_minimal += 1;
            statistic += alpha_norm(&p[..d], alpha);
        }
    }
    ReplicateOutcome { n_points, n_minimal, statistic }
}
