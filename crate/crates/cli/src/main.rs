use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdstlab::{run_experiment_with_progress, ConfigOverrides, ExperimentConfig, ExperimentKind, HarnessError, Summary};

#[derive(Parser)]
#[command(name = "mdstlab", version, about = "Simulation and quadrature for rooted MDST length statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicates at a single intensity.
    Simulate(Common),
    /// Mean or variance growth over an intensity grid.
    Sweep {
        #[arg(long, value_enum, default_value = "mean")]
        kind: SweepKind,
        #[command(flatten)]
        common: Common,
    },
    /// Distance to the normal law over an intensity grid.
    Clt(Common),
    /// Planar case against Dickman reference draws.
    Dickman(Common),
    /// Table of limiting constants.
    Theory(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Mean,
    Variance,
}

#[derive(Args)]
struct Common {
    /// Dimension (comma-separated list for `theory`).
    #[arg(long, value_delimiter = ',')]
    dim: Vec<usize>,
    /// Length exponent (comma-separated list for `theory`).
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, visible_alias = "intensity")]
    s_min: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    s_ratio: Option<f64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "MDSTLAB_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file whose fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    quad_evals: Option<u64>,
    /// Store per-replicate wall-clock time (makes records irreproducible).
    #[arg(long)]
    record_timing: bool,
}

impl Common {
    fn overrides(&self, kind: ExperimentKind, single_level: bool) -> Result<ConfigOverrides, HarnessError> {
        let single = |name: &str, n: usize| {
            if n > 1 && kind != ExperimentKind::TheoryTable {
                Err(HarnessError::Config(format!("--{name} takes a single value here")))
            } else {
                Ok(())
            }
        };
        single("dim", self.dim.len())?;
        single("alpha", self.alpha.len())?;
        let theory = kind == ExperimentKind::TheoryTable;
        let mut s_max = self.s_max;
        if single_level && s_max.is_none() {
            s_max = self.s_min;
        }
        Ok(ConfigOverrides {
            experiment_kind: Some(kind),
            dimension: if theory { None } else { self.dim.first().copied() },
            alpha: if theory { None } else { self.alpha.first().copied() },
            s_min: self.s_min,
            s_max,
            s_ratio: self.s_ratio,
            replications: self.reps,
            master_seed: self.seed,
            output_path: self.out.clone(),
            quadrature_evaluations: self.quad_evals,
            worker_count: self.workers,
            record_timing: self.record_timing.then_some(true),
            theory_dimensions: (theory && !self.dim.is_empty()).then(|| self.dim.clone()),
            theory_alphas: (theory && !self.alpha.is_empty()).then(|| self.alpha.clone()),
            ..ConfigOverrides::default()
        })
    }
}

fn run(command: Command) -> Result<Summary, HarnessError> {
    let single_level = matches!(command, Command::Simulate(_));
    let (kind, common) = match command {
        Command::Simulate(c) => (ExperimentKind::MeanSweep, c),
        Command::Sweep { kind: SweepKind::Mean, common } => (ExperimentKind::MeanSweep, common),
        Command::Sweep { kind: SweepKind::Variance, common } => (ExperimentKind::VarianceSweep, common),
        Command::Clt(c) => (ExperimentKind::CltConvergence, c),
        Command::Dickman(c) => (ExperimentKind::DickmanCompare, c),
        Command::Theory(c) => (ExperimentKind::TheoryTable, c),
    };
    let mut settings = common.overrides(kind, single_level)?;
    if let Some(path) = &common.config {
        let file = ConfigOverrides::from_json_file(path)?;
        if file.intensity_grid.is_some() {
            settings.s_min = None;
            settings.s_max = None;
            settings.s_ratio = None;
        }
        settings = file.over(settings);
    }
    let config = ExperimentConfig::resolve(kind, settings)?;
    run_experiment_with_progress(&config, |line| eprintln!("{line}"))
}

fn report(summary: &Summary) {
    for level in &summary.levels {
        println!(
            "s={} mean={:.6} var={:.6} minimal={:.2}",
            level.s, level.mean, level.variance, level.mean_n_minimal
        );
    }
    if let Some(fit) = &summary.mean_fit {
        println!("mean slope {:.4} (leading term {:.4})", fit.fit.slope, fit.target_slope);
    }
    if let Some(fit) = &summary.variance_fit {
        println!("variance slope {:.4} (leading term {:.4})", fit.fit.slope, fit.target_slope);
    }
    if let Some(rate) = &summary.rate {
        if let Some(k) = &rate.kolmogorov_all {
            println!("d_K rate slope {:.4} (expected {:.4})", k.fit.slope, k.expected_slope);
        }
        for note in &rate.notes {
            println!("note: {note}");
        }
    }
    if let Some(table) = &summary.theory_table {
        for (d, z) in &table.zeta_square_integral {
            println!("d={d} zeta_square_integral={z:.10}");
        }
        for (key, c) in &table.constants {
            println!("{key} mean_coefficient={:.6} w={:.6} variance_coefficient={:.6}", c.mean_coefficient, c.w_value.value, c.variance_coefficient);
        }
    }
    println!("summary: {}", summary.config.summary_path().display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(summary) => {
            report(&summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
