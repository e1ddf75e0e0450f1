//! The environment-by-agent comparison matrices.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ExperimentConfig, ThresholdChoice, VariationConfig};
use super::export::{export_results, format_number, write_leaderboard, SummaryExtras, LEADERBOARD_FILE};
use super::grid::{default_grid, grid_search};
use super::run::run_experiment;
use super::stats::{summarize, AggregateCurve};
use crate::agents::{AgentConfig, AgentFamily, AgentKind};
use crate::env::EnvironmentId;
use crate::error::{Error, Result};
use crate::variation::VariationProcess;

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const PRESET_EPISODES: usize = 1000;
pub const PRESET_SEEDS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Two-level factor with `eps0 = eps1 = 0`, `rho = 0.5`.
    Binary,
    /// Beta(2, 2) factor with 5% quantile thresholds.
    Beta,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Binary => "binary",
            Figure::Beta => "beta",
        }
    }

    pub fn variation(self) -> VariationConfig {
        match self {
            Figure::Binary => VariationConfig::new(VariationProcess::BinaryIid {
                eps0: 0.0,
                eps1: 0.0,
                rho: 0.5,
            }),
            Figure::Beta => VariationConfig {
                process: VariationProcess::BetaIid { alpha: 2.0, beta: 2.0 },
                thresholds: ThresholdChoice::Quantile(0.05),
            },
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Figure::Binary),
            "beta" => Ok(Figure::Beta),
            other => Err(Error::config("figure", format!("unknown figure `{other}` (binary, beta)"))),
        }
    }
}

/// How agent hyperparameters are chosen for each cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tuning {
    /// The built-in per-environment settings from [`tuned_agent`].
    Preset,
    /// A fresh search over [`default_grid`] on the preset seeds, selected at
    /// the last episode.
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    pub figure: Figure,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub tuning: Tuning,
    pub environments: Vec<EnvironmentId>,
}

impl ReproduceOptions {
    pub fn new(figure: Figure) -> Self {
        Self {
            figure,
            episodes: PRESET_EPISODES,
            seeds: (1..=PRESET_SEEDS).collect(),
            tuning: Tuning::Preset,
            environments: EnvironmentId::ALL.to_vec(),
        }
    }
}

/// Agent settings used by the preset matrix: the winners of
/// [`default_grid`] on the binary figure (20 seeds, selected at episode
/// 1000). `reproduce --search` recomputes them.
pub fn tuned_agent(environment: EnvironmentId, kind: AgentKind) -> AgentConfig {
    use AgentKind::*;
    use EnvironmentId::*;
    let mut agent = AgentConfig::new(kind);
    match kind.family() {
        AgentFamily::Ucrl2 => {
            agent.scale = 0.1;
            agent.delta = match (environment, kind) {
                (_, Ucrl2) => 0.5,
                (CliffWalking, _) => 0.1,
                _ => 0.01,
            };
        }
        AgentFamily::Psrl => agent.prior_value = 0.1,
    }
    agent
}

/// One cell of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub environment: EnvironmentId,
    pub agent: AgentConfig,
    pub aggregate: AggregateCurve,
    pub dir: PathBuf,
}

/// Baseline versus opportunistic final regret for one (environment, family).
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub environment: EnvironmentId,
    pub family: AgentFamily,
    pub baseline_mean: f64,
    pub baseline_ci: f64,
    pub opportunistic_mean: f64,
    pub opportunistic_ci: f64,
}

impl Comparison {
    /// `(baseline - opportunistic) / baseline`.
    pub fn reduction(&self) -> f64 {
        reduction(self.baseline_mean, self.opportunistic_mean)
    }
}

pub fn reduction(baseline: f64, opportunistic: f64) -> f64 {
    (baseline - opportunistic) / baseline
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceReport {
    pub cells: Vec<CellResult>,
    pub comparisons: Vec<Comparison>,
    pub comparison_file: PathBuf,
}

impl ReproduceReport {
    pub fn cell(&self, environment: EnvironmentId, kind: AgentKind) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.environment == environment && c.agent.kind == kind)
    }

    pub fn comparison(&self, environment: EnvironmentId, family: AgentFamily) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.environment == environment && c.family == family)
    }
}

/// Run every environment with all four agents and write
/// `<out>/<environment>/<agent>/` result files plus `<out>/comparison.csv`.
pub fn reproduce(options: &ReproduceOptions, out: &Path) -> Result<ReproduceReport> {
    if options.episodes == 0 {
        return Err(Error::config("episodes", "must be at least 1"));
    }
    let mut cells = Vec::new();
    for &environment in &options.environments {
        for kind in AgentKind::ALL {
            let dir = out.join(environment.name()).join(kind.name());
            let base = ExperimentConfig {
                environment,
                agent: tuned_agent(environment, kind),
                variation: options.figure.variation(),
                episodes: options.episodes,
                seeds: options.seeds.clone(),
                output: Some(dir.clone()),
            };
            let start = Instant::now();
            let (config, curves, winner) = match options.tuning {
                Tuning::Preset => {
                    let curves = run_experiment(&base)?;
                    (base, curves, None)
                }
                Tuning::Search => {
                    let outcome = grid_search(&base, &default_grid(kind.family()), options.episodes)?;
                    write_leaderboard(&outcome.leaderboard, &dir.join(LEADERBOARD_FILE))?;
                    (outcome.best_config, outcome.best_curves, Some(outcome.best))
                }
            };
            let aggregate = summarize(&curves)?;
            export_results(&curves, &aggregate, &config, &SummaryExtras {
                    wall_clock_seconds: start.elapsed().as_secs_f64(),
                    grid_winner: winner,
                }, &dir)?;
            cells.push(CellResult {
                environment,
                agent: config.agent,
                aggregate,
                dir,
            });
        }
    }

    let mut comparisons = Vec::new();
    for &environment in &options.environments {
        for family in [AgentFamily::Ucrl2, AgentFamily::Psrl] {
            let find = |kind: AgentKind| {
                cells
                    .iter()
                    .find(|c| c.environment == environment && c.agent.kind == kind)
                    .expect("every cell ran")
            };
            let (base, opp) = (find(family.baseline()), find(family.opportunistic()));
            comparisons.push(Comparison {
                environment,
                family,
                baseline_mean: base.aggregate.final_mean(),
                baseline_ci: base.aggregate.final_ci(),
                opportunistic_mean: opp.aggregate.final_mean(),
                opportunistic_ci: opp.aggregate.final_ci(),
            });
        }
    }
    let comparison_file = out.join(COMPARISON_FILE);
    write_comparison(&comparisons, &comparison_file)?;
    Ok(ReproduceReport {
        cells,
        comparisons,
        comparison_file,
    })
}

pub fn write_comparison(comparisons: &[Comparison], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = String::from(
        "environment,family,baseline,baseline_final_regret,baseline_ci_half_width,\
         opportunistic,opportunistic_final_regret,opportunistic_ci_half_width,reduction_percent\n",
    );
    for c in comparisons {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.environment.name(),
            c.family.name(),
            c.family.baseline().name(),
            format_number(c.baseline_mean),
            format_number(c.baseline_ci),
            c.family.opportunistic().name(),
            format_number(c.opportunistic_mean),
            format_number(c.opportunistic_ci),
            format_number(100.0 * c.reduction()),
        ));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
