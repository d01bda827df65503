//! Experiment configuration: defaults, command-line values, JSON overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MeanSweep,
    VarianceSweep,
    CltConvergence,
    DickmanCompare,
    TheoryTable,
}

impl ExperimentKind {
    fn simulates(self) -> bool {
        self != Self::TheoryTable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_kind: ExperimentKind,
    pub dimension: usize,
    pub alpha: f64,
    pub intensity_grid: Vec<f64>,
    pub replications: u64,
    pub master_seed: u64,
    /// Directory receiving `records.csv` and `summary.json`.
    pub output_path: PathBuf,
    pub quadrature_evaluations: u64,
    pub worker_count: usize,
    /// Store wall-clock time per replicate. Off by default so that record
    /// files are byte-for-byte reproducible.
    #[serde(default)]
    pub record_timing: bool,
    /// Dimensions tabulated by `TheoryTable`.
    #[serde(default)]
    pub theory_dimensions: Vec<usize>,
    /// Exponents tabulated by `TheoryTable`.
    #[serde(default)]
    pub theory_alphas: Vec<f64>,
}

/// Every field optional; present fields replace the corresponding setting.
/// The grid may be given either explicitly or as `s_min`/`s_max`/`s_ratio`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment_kind: Option<ExperimentKind>,
    pub dimension: Option<usize>,
    pub alpha: Option<f64>,
    pub intensity_grid: Option<Vec<f64>>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub s_ratio: Option<f64>,
    pub replications: Option<u64>,
    pub master_seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub quadrature_evaluations: Option<u64>,
    pub worker_count: Option<usize>,
    pub record_timing: Option<bool>,
    pub theory_dimensions: Option<Vec<usize>>,
    pub theory_alphas: Option<Vec<f64>>,
}

impl ConfigOverrides {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields of `self` take precedence over those of `base`.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            experiment_kind: self.experiment_kind.or(base.experiment_kind),
            dimension: self.dimension.or(base.dimension),
            alpha: self.alpha.or(base.alpha),
            intensity_grid: self.intensity_grid.or(base.intensity_grid),
            s_min: self.s_min.or(base.s_min),
            s_max: self.s_max.or(base.s_max),
            s_ratio: self.s_ratio.or(base.s_ratio),
            replications: self.replications.or(base.replications),
            master_seed: self.master_seed.or(base.master_seed),
            output_path: self.output_path.or(base.output_path),
            quadrature_evaluations: self.quadrature_evaluations.or(base.quadrature_evaluations),
            worker_count: self.worker_count.or(base.worker_count),
            record_timing: self.record_timing.or(base.record_timing),
            theory_dimensions: self.theory_dimensions.or(base.theory_dimensions),
            theory_alphas: self.theory_alphas.or(base.theory_alphas),
        }
    }
}

pub const DEFAULT_REPLICATIONS: u64 = 2000;
pub const DEFAULT_QUADRATURE_EVALUATIONS: u64 = 10_000_000;

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    /// Builds a validated configuration for `kind` from `settings`, filling
    /// gaps with the defaults for that kind.
    pub fn resolve(kind: ExperimentKind, settings: ConfigOverrides) -> Result<Self> {
        let kind = settings.experiment_kind.unwrap_or(kind);
        let (d, grid): (usize, (f64, f64, f64)) = match kind {
            ExperimentKind::DickmanCompare => (2, (1e5, 1e5, 10.0)),
            _ => (3, (1e2, 1e6, 10.0)),
        };
        let intensity_grid = match settings.intensity_grid {
            Some(g) => {
                if settings.s_min.is_some() || settings.s_max.is_some() || settings.s_ratio.is_some() {
                    return Err(HarnessError::Config(
                        "give either intensity_grid or s_min/s_max/s_ratio, not both".into(),
                    ));
                }
                g
            }
            None => {
                let s_min = settings.s_min.unwrap_or(grid.0);
                let s_max = settings.s_max.unwrap_or(grid.1.max(s_min));
                geometric_grid(s_min, s_max, settings.s_ratio.unwrap_or(grid.2))?
            }
        };
        let config = Self {
            experiment_kind: kind,
            dimension: settings.dimension.unwrap_or(d),
            alpha: settings.alpha.unwrap_or(1.0),
            intensity_grid,
            replications: settings.replications.unwrap_or(DEFAULT_REPLICATIONS),
            master_seed: settings.master_seed.unwrap_or(0),
            output_path: settings.output_path.unwrap_or_else(|| PathBuf::from("mdstlab-out")),
            quadrature_evaluations: settings.quadrature_evaluations.unwrap_or(DEFAULT_QUADRATURE_EVALUATIONS),
            worker_count: settings.worker_count.unwrap_or_else(default_workers),
            record_timing: settings.record_timing.unwrap_or(false),
            theory_dimensions: settings.theory_dimensions.unwrap_or_else(|| vec![1, 2, 3, 4]),
            theory_alphas: settings.theory_alphas.unwrap_or_else(|| vec![0.5, 1.0, 2.0]),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.worker_count == 0 {
            return fail("worker_count must be at least 1".into());
        }
        if self.quadrature_evaluations == 0 {
            return fail("quadrature_evaluations must be positive".into());
        }
        if self.experiment_kind == ExperimentKind::TheoryTable {
            if self.theory_dimensions.is_empty() || self.theory_alphas.is_empty() {
                return fail("theory table needs at least one dimension and one alpha".into());
            }
            if self.theory_dimensions.iter().any(|&d| d == 0 || d > 16) {
                return fail("theory dimensions must lie in 1..=16".into());
            }
            if self.theory_alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return fail("theory alphas must be positive".into());
            }
            return Ok(());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        if self.intensity_grid.is_empty() {
            return fail("intensity grid is empty".into());
        }
        if self.intensity_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return fail("intensities must be positive and finite".into());
        }
        if self.intensity_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("intensity grid must be strictly increasing".into());
        }
        let min_d = match self.experiment_kind {
            ExperimentKind::VarianceSweep => 3,
            _ => 2,
        };
        if self.dimension < min_d {
            return fail(format!("{:?} needs dimension at least {min_d}", self.experiment_kind));
        }
        match self.experiment_kind {
            ExperimentKind::DickmanCompare if self.dimension != 2 || self.alpha != 1.0 => {
                fail("the Dickman comparison is defined for d = 2, alpha = 1".into())
            }
            ExperimentKind::CltConvergence if self.intensity_grid[0] <= std::f64::consts::E => {
                fail("rate regression needs every s > e (log log s > 0)".into())
            }
            ExperimentKind::CltConvergence if self.replications < 2 => {
                fail("standardization needs at least 2 replications".into())
            }
            _ => Ok(()),
        }
    }

    pub fn simulates(&self) -> bool {
        self.experiment_kind.simulates()
    }

    pub fn records_path(&self) -> PathBuf {
        self.output_path.join("records.csv")
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output_path.join("summary.json")
    }

    /// Identifies the replicate population: records sharing a run id are
    /// interchangeable, whatever grid, replication count or worker count
    /// produced them.
    pub fn run_id(&self) -> String {
        let key = format!("d={};alpha={};seed={};process=poisson", self.dimension, self.alpha.to_bits(), self.master_seed);
        format!("{:016x}", fnv1a(key.as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// `s_min, s_min r, s_min r^2, ...` up to `s_max` (inclusive, with a relative
/// slack of 1e-9 for rounding).
pub fn geometric_grid(s_min: f64, s_max: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(s_min > 0.0 && s_min.is_finite()) || !(s_max.is_finite()) {
        return Err(HarnessError::Config(format!("invalid grid bounds {s_min}..{s_max}")));
    }
    if s_max < s_min {
        return Err(HarnessError::Config(format!("s_max {s_max} is below s_min {s_min}")));
    }
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(HarnessError::Config(format!("s_ratio must exceed 1, got {ratio}")));
    }
    let mut grid = Vec::new();
    let mut k = 0;
    loop {
        let s = s_min * ratio.powi(k);
        if s > s_max * (1.0 + 1e-9) {
            break;
        }
        grid.push(s);
        k += 1;
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_clt_grid() {
        let c = ExperimentConfig::resolve(ExperimentKind::CltConvergence, ConfigOverrides::default()).unwrap();
        assert_eq!(c.intensity_grid, vec![1e2, 1e3, 1e4, 1e5, 1e6]);
        assert_eq!(c.replications, 2000);
        let d = ExperimentConfig::resolve(ExperimentKind::DickmanCompare, ConfigOverrides::default()).unwrap();
        assert_eq!((d.dimension, d.intensity_grid.clone()), (2, vec![1e5]));
    }

    #[test]
    fn overrides_take_precedence() {
        let flags = ConfigOverrides { dimension: Some(4), replications: Some(5), ..Default::default() };
        let file: ConfigOverrides = serde_json::from_str(r#"{"replications": 9, "intensity_grid": [10, 20]}"#).unwrap();
        let c = ExperimentConfig::resolve(ExperimentKind::MeanSweep, file.over(flags)).unwrap();
        assert_eq!((c.dimension, c.replications), (4, 9));
        assert_eq!(c.intensity_grid, vec![10.0, 20.0]);
        assert!(serde_json::from_str::<ConfigOverrides>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            ConfigOverrides { intensity_grid: Some(vec![10.0, 5.0]), ..Default::default() },
            ConfigOverrides { replications: Some(0), ..Default::default() },
            ConfigOverrides { worker_count: Some(0), ..Default::default() },
            ConfigOverrides { s_ratio: Some(1.0), ..Default::default() },
            ConfigOverrides { alpha: Some(-1.0), ..Default::default() },
            ConfigOverrides { dimension: Some(1), ..Default::default() },
        ];
        for b in bad {
            let e = ExperimentConfig::resolve(ExperimentKind::MeanSweep, b).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{e}");
        }
    }

    #[test]
    fn run_id_ignores_execution_details() {
        let a = ExperimentConfig::resolve(ExperimentKind::MeanSweep, ConfigOverrides { worker_count: Some(1), ..Default::default() }).unwrap();
        let b = ExperimentConfig::resolve(
            ExperimentKind::MeanSweep,
            ConfigOverrides { worker_count: Some(8), replications: Some(3), ..Default::default() },
        )
        .unwrap();
        assert_eq!(a.run_id(), b.run_id());
        let c = ExperimentConfig::resolve(ExperimentKind::MeanSweep, ConfigOverrides { master_seed: Some(1), ..Default::default() }).unwrap();
        assert_ne!(a.run_id(), c.run_id());
    }
}
