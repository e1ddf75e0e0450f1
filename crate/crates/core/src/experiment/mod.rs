//! Multi-seed experiments: configuration, runs, aggregation, search and
//! result files.

pub mod config;
pub mod export;
pub mod grid;
pub mod presets;
pub mod run;
pub mod stats;

pub use config::{parse_seeds, ExperimentConfig, ThresholdChoice, VariationConfig};
pub use export::{export_results, format_number, read_aggregate, read_episodes, write_leaderboard, ExportedFiles, SummaryExtras};
pub use grid::{default_grid, grid_search, parse_grid, read_grid, GridEntry, GridOutcome, ParameterGrid};
pub use presets::{reproduce, Comparison, Figure, ReproduceOptions, ReproduceReport, Tuning};
pub use run::{episode_regret, run_experiment, run_single, run_single_observed, RegretCurve};
pub use stats::{aggregate, summarize, AggregateCurve};
