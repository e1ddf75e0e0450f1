//! Exhaustive hyperparameter search over agent settings.

use std::collections::BTreeMap;
use std::path::Path;

use toml::{Table, Value};

use super::config::ExperimentConfig;
use super::run::{run_experiment, RegretCurve};
use super::stats::summarize;
use crate::agents::AgentFamily;
use crate::error::{Error, Result};

/// Parameter key (e.g. `agent.scale`) to candidate values. Keys iterate in
/// lexicographic order.
pub type ParameterGrid = BTreeMap<String, Vec<f64>>;

/// One point of the grid, in key order.
pub type Assignment = Vec<(String, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub assignment: Assignment,
    /// Mean cumulative regret at the selection episode.
    pub metric: f64,
    pub ci_half_width: f64,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub best: Assignment,
    /// Every grid point, ascending by metric; ties keep grid order.
    pub leaderboard: Vec<GridEntry>,
    /// Config with the winning assignment applied.
    pub best_config: ExperimentConfig,
    /// The winning point's runs, one per seed.
    pub best_curves: Vec<RegretCurve>,
}

/// Default search space for an agent family.
pub fn default_grid(family: AgentFamily) -> ParameterGrid {
    let mut grid = ParameterGrid::new();
    match family {
        AgentFamily::Ucrl2 => {
            grid.insert("agent.delta".into(), vec![0.01, 0.05, 0.1, 0.5]);
            grid.insert("agent.scale".into(), vec![0.1, 0.5, 1.0]);
        }
        AgentFamily::Psrl => {
            grid.insert("agent.prior_value".into(), vec![0.1, 1.0]);
        }
    }
    grid
}

/// Cartesian product in deterministic order: the first key varies slowest.
pub fn assignments(grid: &ParameterGrid) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = vec![Vec::new()];
    for (key, values) in grid {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push((key.clone(), v));
                    next
                })
            })
            .collect();
    }
    out
}

pub fn apply(base: &ExperimentConfig, assignment: &Assignment) -> Result<ExperimentConfig> {
    let mut config = base.clone();
    for (key, value) in assignment {
        config.agent.set(key, *value)?;
    }
    config.agent.validate()?;
    Ok(config)
}

/// Run every grid point and pick the one with the lowest mean cumulative
/// regret at `selection_episode`.
pub fn grid_search(base: &ExperimentConfig, grid: &ParameterGrid, selection_episode: usize) -> Result<GridOutcome> {
    if grid.is_empty() {
        return Err(Error::config("grid", "empty grid"));
    }
    if let Some((key, _)) = grid.iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::config(key.clone(), "empty value list"));
    }
    if selection_episode == 0 || selection_episode > base.episodes {
        return Err(Error::config(
            "select_at",
            format!("must lie in 1..={}, got {selection_episode}", base.episodes),
        ));
    }
    base.validate()?;

    let mut leaderboard = Vec::new();
    let mut best: Option<(f64, ExperimentConfig, Vec<RegretCurve>)> = None;
    for assignment in assignments(grid) {
        let config = apply(base, &assignment)?;
        let curves = run_experiment(&config)?;
        let summary = summarize(&curves)?;
        let metric = summary.mean_at(selection_episode);
        leaderboard.push(GridEntry {
            assignment,
            metric,
            ci_half_width: summary.ci_half_width[selection_episode - 1],
        });
        if best.as_ref().is_none_or(|(m, _, _)| metric < *m) {
            best = Some((metric, config, curves));
        }
    }
    leaderboard.sort_by(|a, b| a.metric.total_cmp(&b.metric));
    let (_, best_config, best_curves) = best.expect("grid is nonempty");
    Ok(GridOutcome {
        best: leaderboard[0].assignment.clone(),
        leaderboard,
        best_config,
        best_curves,
    })
}

/// Read a grid file: numeric arrays, keyed by dotted names either written
/// literally or as nested tables (`[agent]` / `scale = [...]`).
pub fn parse_grid(text: &str) -> Result<ParameterGrid> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<grid>", e.message().to_string()))?;
    let mut grid = ParameterGrid::new();
    flatten(&table, "", &mut grid)?;
    if grid.is_empty() {
        return Err(Error::config("grid", "empty grid"));
    }
    Ok(grid)
}

pub fn read_grid(path: &Path) -> Result<ParameterGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grid(&text)
}

fn flatten(table: &Table, prefix: &str, grid: &mut ParameterGrid) -> Result<()> {
    for (k, v) in table {
        let key = format!("{prefix}{k}");
        match v {
            Value::Table(inner) => flatten(inner, &format!("{key}."), grid)?,
            Value::Array(items) => {
                let values = items
                    .iter()
                    .map(|item| match item {
                        Value::Float(f) => Ok(*f),
                        Value::Integer(i) => Ok(*i as f64),
                        _ => Err(Error::config(key.clone(), "grid values must be numbers")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if values.is_empty() {
                    return Err(Error::config(key, "empty value list"));
                }
                // Validates the key.
                crate::agents::AgentConfig::new(crate::agents::AgentKind::Ucrl2).set(&key, values[0])?;
                grid.insert(key, values);
            }
            _ => return Err(Error::config(key, "expected an array of numbers")),
        }
    }
    Ok(())
}
