//! Result files: per-episode CSV, aggregate CSV and a TOML summary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use super::config::ExperimentConfig;
use super::grid::GridEntry;
use super::run::RegretCurve;
use super::stats::AggregateCurve;
use crate::error::{Error, Result};

pub const EPISODES_FILE: &str = "episodes.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const SUMMARY_FILE: &str = "summary.toml";
pub const LEADERBOARD_FILE: &str = "leaderboard.csv";

pub const EPISODES_HEADER: [&str; 7] = [
    "episode",
    "seed",
    "algorithm",
    "environment",
    "L_k",
    "episode_regret",
    "cum_regret",
];
pub const AGGREGATE_HEADER: [&str; 3] = ["episode", "mean_cum_regret", "ci_half_width"];

/// Format with 12 significant digits, without trailing zeros.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        let text = format!("{x:.decimals$}");
        let text = if text.contains('.') {
            text.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            text
        };
        if text == "-0" {
            "0".into()
        } else {
            text
        }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedFiles {
    pub episodes: PathBuf,
    pub aggregate: PathBuf,
    pub summary: PathBuf,
}

/// Extra entries for the summary document.
#[derive(Debug, Clone, Default)]
pub struct SummaryExtras {
    /// Seconds spent producing the curves.
    pub wall_clock_seconds: f64,
    pub grid_winner: Option<Vec<(String, f64)>>,
}

pub fn export_results(
    curves: &[RegretCurve],
    aggregate: &AggregateCurve,
    config: &ExperimentConfig,
    extras: &SummaryExtras,
    dir: &Path,
) -> Result<ExportedFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = ExportedFiles {
        episodes: dir.join(EPISODES_FILE),
        aggregate: dir.join(AGGREGATE_FILE),
        summary: dir.join(SUMMARY_FILE),
    };

    let mut w = csv_writer(&files.episodes)?;
    write_row(&mut w, &files.episodes, EPISODES_HEADER)?;
    let algorithm = config.agent.kind.name();
    let environment = config.environment.name();
    for curve in curves {
        for k in 0..curve.len() {
            write_row(
                &mut w,
                &files.episodes,
                [
                    (k + 1).to_string(),
                    curve.seed.to_string(),
                    algorithm.to_string(),
                    environment.to_string(),
                    format_number(curve.variation_trace[k]),
                    format_number(curve.per_episode_regret[k]),
                    format_number(curve.cumulative[k]),
                ],
            )?;
        }
    }
    finish(w, &files.episodes)?;

    write_aggregate(aggregate, &files.aggregate)?;

    let mut summary = Table::new();
    let config_table: Table = config.to_toml().parse().expect("own serialization parses");
    summary.insert("config".into(), Value::Table(config_table));
    let mut result = Table::new();
    result.insert("episodes".into(), Value::Integer(aggregate.len() as i64));
    result.insert("num_seeds".into(), Value::Integer(aggregate.num_seeds as i64));
    result.insert("final_mean_cum_regret".into(), Value::Float(aggregate.final_mean()));
    result.insert("final_ci_half_width".into(), Value::Float(aggregate.final_ci()));
    result.insert(
        "final".into(),
        Value::String(format!(
            "{} ± {}",
            format_number(aggregate.final_mean()),
            format_number(aggregate.final_ci())
        )),
    );
    result.insert("wall_clock_seconds".into(), Value::Float(extras.wall_clock_seconds));
    summary.insert("result".into(), Value::Table(result));
    if let Some(winner) = &extras.grid_winner {
        let table: Table = winner.iter().map(|(k, v)| (k.clone(), Value::Float(*v))).collect();
        summary.insert("grid_winner".into(), Value::Table(table));
    }
    let text = toml::to_string(&summary).expect("plain tables serialize");
    fs::write(&files.summary, text).map_err(|e| Error::io(&files.summary, e))?;
    Ok(files)
}

pub fn write_aggregate(aggregate: &AggregateCurve, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, AGGREGATE_HEADER)?;
    for k in 0..aggregate.len() {
        write_row(
            &mut w,
            path,
            [
                (k + 1).to_string(),
                format_number(aggregate.mean[k]),
                format_number(aggregate.ci_half_width[k]),
            ],
        )?;
    }
    finish(w, path)
}

/// Leaderboard CSV: one column per grid key, then the selection metric.
pub fn write_leaderboard(entries: &[GridEntry], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv_writer(path)?;
    let keys: Vec<String> = entries
        .first()
        .map(|e| e.assignment.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = vec!["rank".into()];
    header.extend(keys.iter().cloned());
    header.push("mean_cum_regret".into());
    header.push("ci_half_width".into());
    write_row(&mut w, path, &header)?;
    for (rank, entry) in entries.iter().enumerate() {
        let mut row = vec![(rank + 1).to_string()];
        row.extend(entry.assignment.iter().map(|(_, v)| format_number(*v)));
        row.push(format_number(entry.metric));
        row.push(format_number(entry.ci_half_width));
        write_row(&mut w, path, &row)?;
    }
    finish(w, path)
}

/// Parse a per-episode CSV back into curves, one per seed in file order.
/// The `value_gap` field is reconstructed as `episode_regret / L_k` where
/// `L_k` is nonzero and left at zero otherwise.
pub fn read_episodes(path: &Path) -> Result<Vec<RegretCurve>> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().ne(EPISODES_HEADER.iter().copied()) {
        return Err(Error::InvalidParameter(format!(
            "{}: unexpected header {:?}",
            path.display(),
            headers
        )));
    }
    let mut order = Vec::new();
    let mut by_seed: BTreeMap<u64, RegretCurve> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|_| {
                Error::InvalidParameter(format!("{}: bad number `{}`", path.display(), &record[i]))
            })
        };
        let seed = field(1)? as u64;
        let curve = by_seed.entry(seed).or_insert_with(|| {
            order.push(seed);
            RegretCurve {
                seed,
                per_episode_regret: Vec::new(),
                cumulative: Vec::new(),
                variation_trace: Vec::new(),
                value_gap: Vec::new(),
            }
        });
        let (level, regret) = (field(4)?, field(5)?);
        curve.variation_trace.push(level);
        curve.per_episode_regret.push(regret);
        curve.cumulative.push(field(6)?);
        curve.value_gap.push(if level != 0.0 { regret / level } else { 0.0 });
    }
    Ok(order.into_iter().map(|s| by_seed.remove(&s).expect("seen")).collect())
}

pub fn read_aggregate(path: &Path) -> Result<AggregateCurve> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut mean = Vec::new();
    let mut ci = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let parse = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("{}: bad number `{}`", path.display(), &record[i])))
        };
        mean.push(parse(1)?);
        ci.push(parse(2)?);
    }
    Ok(AggregateCurve {
        mean,
        ci_half_width: ci,
        num_seeds: 0,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn write_row<I, T>(w: &mut csv::Writer<File>, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| csv_error(path, e))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.5), "1.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123456.789012345), "123456.789012");
        assert_eq!(format_number(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_number(1e-9), "1.00000000000e-9");
        assert_eq!(format_number(1234.0), "1234");
        assert_eq!("1.00000000000e-9".parse::<f64>().unwrap(), 1e-9);
    }

    #[test]
    fn formatted_numbers_are_within_relative_precision() {
        for x in [std::f64::consts::PI, 1e-4 / 7.0, 98765.4321 / 9.0, -3.3e7 / 7.0, 5e20 / 3.0] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11, "{x} -> {}", format_number(x));
        }
    }
}
