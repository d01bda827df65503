//! Orchestration of replicate batches and summary generation.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::time::Instant;

use mdst_core::empirics::{
    linear_fit, noise_floor, rate_regression, sample_mean, sample_variance, standardize, DistanceReport, LinearFit,
    RateFit, SampleMeta, Standardization, StatSampleSet,
};
use mdst_core::exec::map_indexed;
use mdst_core::sampling::{derive_seed, replicate_seed, sample_dickman, sample_dickman_sum, DickmanSamplerConfig};
use mdst_core::theory::{
    constants_table, mean_asymptotic, mean_coefficient, mean_finite, variance_asymptotic, w_lower_bound,
    zeta_square_integral, TheoryConstants,
};
use mdst_core::{simulate_replicate, Execution, QuadratureConfig, SamplerConfig};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::records::{load_records, write_records, ExperimentRecord};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Distances below this multiple of the noise floor are left out of the
/// masked rate regression.
pub const MASK_FACTOR: f64 = 3.0;

// Stream indices under the master seed, apart from the replicate streams.
const QUADRATURE_STREAM: u64 = 0x7175_6164;
const DICKMAN_STREAM: u64 = 0x6469_636b;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub run_id: String,
    pub experiment_kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub levels: Vec<LevelSummary>,
    pub mean_fit: Option<SlopeCheck>,
    pub variance_fit: Option<SlopeCheck>,
    pub theory: Option<TheoryConstants>,
    pub rate: Option<RateSummary>,
    pub theory_table: Option<TheoryTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub s: f64,
    pub log_s: f64,
    pub replications: u64,
    pub mean: f64,
    pub mean_std_error: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub mean_n_points: f64,
    pub mean_n_minimal: f64,
    /// Leading asymptotic term of the mean.
    pub mean_leading_term: f64,
    /// Exact mean at this `s`, by quadrature (mean sweeps only).
    pub mean_exact: Option<mdst_core::QuadratureEstimate>,
    pub variance_leading_term: Option<f64>,
    pub distances: Option<DistanceReport>,
    /// Distances after centering at `(3/alpha) log s` and scaling by the
    /// asymptotic standard deviation (`d = 3` only).
    pub centered_distances: Option<DistanceReport>,
    pub dickman: Option<DickmanLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DickmanLevel {
    /// Two-sample KS distance to standard Dickman draws.
    pub ks_standard: f64,
    /// Two-sample KS distance to sums of two independent standard Dickman draws.
    pub ks_two_term_sum: f64,
    pub reference_samples: usize,
}

/// Fit of a level statistic against `log^{d-2} s`, next to the slope the
/// leading asymptotic term predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub fit: LinearFit,
    pub target_slope: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    /// `log d_K` against `log log s` over every level.
    pub kolmogorov_all: Option<RateFit>,
    /// Same, over the levels with `d_K >= MASK_FACTOR * noise_floor`.
    pub kolmogorov_masked: Option<RateFit>,
    pub masked_levels_kept: usize,
    pub mask_threshold: f64,
    pub wasserstein_all: Option<RateFit>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryTable {
    /// Keyed by `d`.
    pub zeta_square_integral: BTreeMap<String, f64>,
    /// Keyed by `d=<d>,alpha=<alpha>`, for `d >= 2`.
    pub constants: BTreeMap<String, TheoryConstants>,
    pub w_lower_bound: BTreeMap<String, f64>,
}

/// Worker pool sized by the configuration. All parallel work runs inside it.
struct Runner {
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
    execution: Execution,
}

impl Runner {
    fn new(workers: usize) -> Result<Self> {
        let execution = if workers > 1 { Execution::Parallel } else { Execution::Sequential };
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
            Ok(Self { pool, execution })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(Self { execution })
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        return self.pool.install(f);
        #[cfg(not(feature = "parallel"))]
        f()
    }

    fn quadrature(&self, config: &ExperimentConfig) -> QuadratureConfig {
        QuadratureConfig::new(config.quadrature_evaluations, derive_seed(config.master_seed, QUADRATURE_STREAM))
            .with_execution(self.execution)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    run_experiment_with_progress(config, |_| {})
}

/// Runs `config`, streaming records to `records.csv` level by level and
/// finishing with `summary.json` in the output directory. `progress`
/// receives one line per completed level.
pub fn run_experiment_with_progress(config: &ExperimentConfig, mut progress: impl FnMut(&str)) -> Result<Summary> {
    config.validate()?;
    prepare_output(config)?;
    let runner = Runner::new(config.worker_count)?;
    let summary = if config.simulates() {
        let samples = simulate_levels(config, &runner, &mut progress)?;
        summarize(config, &runner, &samples)?
    } else {
        theory_summary(config, &runner)?
    };
    let json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    let path = config.summary_path();
    fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;
    Ok(summary)
}

fn prepare_output(config: &ExperimentConfig) -> Result<()> {
    let dir = &config.output_path;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| HarnessError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| HarnessError::io(&probe, e))
}

/// Replicate statistics per level, in grid order.
struct Level {
    s: f64,
    records: Vec<ExperimentRecord>,
}

fn simulate_levels(
    config: &ExperimentConfig,
    runner: &Runner,
    progress: &mut impl FnMut(&str),
) -> Result<Vec<Level>> {
    let run_id = config.run_id();
    let path = config.records_path();
    let mut known: HashMap<(u64, u64), ExperimentRecord> = HashMap::new();
    if path.exists() {
        for r in load_records(&path)? {
            if r.run_id != run_id {
                return Err(HarnessError::Config(format!(
                    "{} holds records of run {}, not {run_id}; choose another output directory",
                    path.display(),
                    r.run_id
                )));
            }
            known.insert((r.s.to_bits(), r.replicate_index), r);
        }
    }
    let mut levels = Vec::with_capacity(config.intensity_grid.len());
    for &s in &config.intensity_grid {
        let missing: Vec<u64> = (0..config.replications).filter(|r| !known.contains_key(&(s.to_bits(), *r))).collect();
        if !missing.is_empty() {
            let fresh = runner.install(|| replicate_records(config, &run_id, s, &missing, runner.execution));
            for rec in fresh? {
                known.insert((rec.s.to_bits(), rec.replicate_index), rec);
            }
            write_records(&path, &canonical(&known))?;
        }
        let records: Vec<ExperimentRecord> =
            (0..config.replications).map(|r| known[&(s.to_bits(), r)].clone()).collect();
        progress(&format!(
            "s = {s}: {} replicates ({} new)",
            config.replications,
            missing.len()
        ));
        levels.push(Level { s, records });
    }
    if !path.exists() {
        write_records(&path, &canonical(&known))?;
    }
    Ok(levels)
}

fn canonical(known: &HashMap<(u64, u64), ExperimentRecord>) -> Vec<ExperimentRecord> {
    let mut all: Vec<ExperimentRecord> = known.values().cloned().collect();
    all.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.replicate_index.cmp(&b.replicate_index)));
    all
}

fn replicate_records(
    config: &ExperimentConfig,
    run_id: &str,
    s: f64,
    indices: &[u64],
    execution: Execution,
) -> Result<Vec<ExperimentRecord>> {
    map_indexed(execution, indices.len(), |i| {
        let r = indices[i];
        let seed = replicate_seed(config.master_seed, s, r);
        let start = config.record_timing.then(Instant::now);
        let out = simulate_replicate(&SamplerConfig::poisson(config.dimension, s, seed), config.alpha)?;
        Ok(ExperimentRecord {
            run_id: run_id.to_owned(),
            d: config.dimension,
            alpha: config.alpha,
            s,
            replicate_index: r,
            seed,
            n_points: out.n_points,
            n_minimal: out.n_minimal,
            statistic_value: out.statistic,
            elapsed_ms: start.map_or(0, |t| t.elapsed().as_millis() as u64),
        })
    })
    .into_iter()
    .collect()
}

fn summarize(config: &ExperimentConfig, runner: &Runner, levels: &[Level]) -> Result<Summary> {
    let d = config.dimension;
    let alpha = config.alpha;
    let kind = config.experiment_kind;
    let needs_constants = d >= 3 && matches!(kind, ExperimentKind::VarianceSweep | ExperimentKind::CltConvergence);
    let theory = if needs_constants {
        let q = runner.quadrature(config);
        Some(runner.install(|| TheoryConstants::evaluate(d, alpha, &q))?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(levels.len());
    for level in levels {
        let values: Vec<f64> = level.records.iter().map(|r| r.statistic_value).collect();
        let n = values.len() as f64;
        let variance = sample_variance(&values);
        let meta = SampleMeta { dimension: d, alpha, s: level.s, master_seed: config.master_seed };
        let set = StatSampleSet::new(meta, values.clone());
        let variance_leading_term = match &theory {
            Some(c) => Some(variance_asymptotic(d, alpha, level.s, c)?),
            None => None,
        };
        let mut summary = LevelSummary {
            s: level.s,
            log_s: level.s.ln(),
            replications: level.records.len() as u64,
            mean: sample_mean(&values),
            mean_std_error: (variance / n).sqrt(),
            variance,
            mean_n_points: level.records.iter().map(|r| r.n_points as f64).sum::<f64>() / n,
            mean_n_minimal: level.records.iter().map(|r| r.n_minimal as f64).sum::<f64>() / n,
            mean_leading_term: mean_asymptotic(d, alpha, level.s.max(1.0))?,
            mean_exact: None,
            variance_leading_term,
            distances: None,
            centered_distances: None,
            dickman: None,
        };
        match kind {
            ExperimentKind::MeanSweep if level.s > 1.0 => {
                let q = runner.quadrature(config).derived(level.s.to_bits());
                summary.mean_exact = Some(runner.install(|| mean_finite(d, alpha, level.s, &q))?);
            }
            ExperimentKind::CltConvergence => {
                let z = standardize(&set, Standardization::Empirical)?;
                summary.distances = Some(DistanceReport::compute(&z, Standardization::Empirical.kind())?);
                if let Some(v) = variance_leading_term.filter(|v| *v > 0.0 && d == 3) {
                    let mode = Standardization::centered_d3(&meta, v)?;
                    let z = standardize(&set, mode)?;
                    summary.centered_distances = Some(DistanceReport::compute(&z, mode.kind())?);
                }
            }
            ExperimentKind::DickmanCompare => {
                let count = values.len();
                let cfg = DickmanSamplerConfig::new(derive_seed(derive_seed(config.master_seed, DICKMAN_STREAM), level.s.to_bits()));
                let standard = sample_dickman(&cfg, count)?;
                let pair = sample_dickman_sum(&cfg, count, 2)?;
                summary.dickman = Some(DickmanLevel {
                    ks_standard: mdst_core::empirics::two_sample_ks(&values, &standard)?,
                    ks_two_term_sum: mdst_core::empirics::two_sample_ks(&values, &pair)?,
                    reference_samples: count,
                });
            }
            _ => {}
        }
        out.push(summary);
    }

    let power = |s: f64| s.ln().powi(d as i32 - 2);
    let slope_check = |ys: &dyn Fn(&LevelSummary) -> f64, target: f64| -> Option<SlopeCheck> {
        if d < 3 || out.len() < 2 {
            return None;
        }
        let pts: Vec<(f64, f64)> = out.iter().map(|l| (power(l.s), ys(l))).collect();
        linear_fit(&pts).ok().map(|fit| SlopeCheck { fit, target_slope: target, relative_error: fit.slope / target - 1.0 })
    };
    let mean_fit = match kind {
        ExperimentKind::MeanSweep | ExperimentKind::VarianceSweep => slope_check(&|l| l.mean, mean_coefficient(d, alpha)?),
        _ => None,
    };
    let variance_fit = match (&theory, kind) {
        (Some(c), ExperimentKind::VarianceSweep) => slope_check(&|l| l.variance, c.variance_coefficient),
        _ => None,
    };
    let rate = (kind == ExperimentKind::CltConvergence).then(|| rate_summary(d, config.replications as usize, &out));

    Ok(Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        run_id: config.run_id(),
        experiment_kind: kind,
        config: config.clone(),
        levels: out,
        mean_fit,
        variance_fit,
        theory,
        rate,
        theory_table: None,
    })
}

fn rate_summary(d: usize, replications: usize, levels: &[LevelSummary]) -> RateSummary {
    let mut notes = Vec::new();
    let threshold = MASK_FACTOR * noise_floor(replications);
    let kolmogorov: Vec<(f64, f64)> =
        levels.iter().filter_map(|l| l.distances.map(|r| (l.s, r.kolmogorov))).collect();
    let wasserstein: Vec<(f64, f64)> =
        levels.iter().filter_map(|l| l.distances.map(|r| (l.s, r.wasserstein1))).collect();
    let mut fit = |pts: &[(f64, f64)], label: &str| match rate_regression(pts, d) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("{label}: {e}"));
            None
        }
    };
    let kept: Vec<(f64, f64)> = kolmogorov.iter().copied().filter(|p| p.1 >= threshold).collect();
    RateSummary {
        kolmogorov_all: fit(&kolmogorov, "kolmogorov, all levels"),
        kolmogorov_masked: fit(&kept, "kolmogorov, masked"),
        masked_levels_kept: kept.len(),
        mask_threshold: threshold,
        wasserstein_all: fit(&wasserstein, "wasserstein, all levels"),
        notes,
    }
}

fn theory_summary(config: &ExperimentConfig, runner: &Runner) -> Result<Summary> {
    let q = runner.quadrature(config);
    let mut zeta = BTreeMap::new();
    let mut bounds = BTreeMap::new();
    let mut constants = Vec::new();
    for &d in &config.theory_dimensions {
        zeta.insert(d.to_string(), zeta_square_integral(d)?);
        if d < 2 {
            continue;
        }
        for &alpha in &config.theory_alphas {
            let c = runner.install(|| TheoryConstants::evaluate(d, alpha, &q.derived(d as u64)))?;
            bounds.insert(c.key(), w_lower_bound(d, alpha)?);
            constants.push(c);
        }
    }
    Ok(Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        run_id: config.run_id(),
        experiment_kind: config.experiment_kind,
        config: config.clone(),
        levels: Vec::new(),
        mean_fit: None,
        variance_fit: None,
        theory: None,
        rate: None,
        theory_table: Some(TheoryTable {
            zeta_square_integral: zeta,
            constants: constants_table(&constants),
            w_lower_bound: bounds,
        }),
    })
}
