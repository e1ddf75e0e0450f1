use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use opprl_core::experiment::export::{write_leaderboard, LEADERBOARD_FILE};
use opprl_core::experiment::grid::read_grid;
use opprl_core::experiment::presets::Tuning;
use opprl_core::experiment::{parse_seeds, SummaryExtras};
use opprl_core::{
    export_results, grid_search, reproduce, run_experiment, summarize, AgentConfig, AgentKind, EnvironmentId, Error,
    ExperimentConfig, Figure, ReproduceOptions, ReproduceReport, VariationConfig,
};

/// Regret experiments for opportunistic episodic RL agents.
#[derive(Debug, Parser)]
#[command(name = "opprl", version)]
struct Cli {
    /// Maximum number of seeds run in parallel [default: available cores]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one agent on one environment over a list of seeds.
    Run(RunArgs),
    /// Search agent hyperparameters and keep the best assignment.
    Grid(GridArgs),
    /// Run the full environment-by-agent comparison for a figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment file (TOML); excludes the flags below except --out
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// river_swim, cliff_walking or frozen_lake
    #[arg(long, value_name = "NAME")]
    env: Option<String>,
    /// ucrl2, opp_ucrl2, psrl or opp_psrl
    #[arg(long, value_name = "NAME")]
    agent: Option<String>,
    /// Number of episodes K
    #[arg(long, value_name = "K")]
    episodes: Option<usize>,
    /// Seed list: "1..20" (inclusive) or "1,2,3"
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,
    /// Variation factor, e.g. "binary:eps0=0,eps1=0,rho=0.5" or "beta:alpha=2,beta=2,threshold_rho=0.05"
    #[arg(long, value_name = "SPEC")]
    variation: Option<String>,
    /// Agent hyperparameter override, e.g. "agent.scale=0.5" (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Base experiment file (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Grid file (TOML): parameter name to a list of values
    #[arg(long, value_name = "PATH")]
    grid: PathBuf,
    /// Episode at which mean cumulative regret is compared [default: last episode]
    #[arg(long, value_name = "K")]
    select_at: Option<usize>,
    /// Output directory [default: `output` from the config file]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// binary or beta
    #[arg(long, value_name = "NAME")]
    figure: String,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Number of episodes K
    #[arg(long, value_name = "K", default_value_t = opprl_core::experiment::presets::PRESET_EPISODES)]
    episodes: usize,
    /// Seed list
    #[arg(long, value_name = "LIST", default_value = "1..20")]
    seeds: String,
    /// Grid-search every cell instead of using the built-in settings
    #[arg(long)]
    search: bool,
    /// Restrict to some environments (comma separated) [default: all three]
    #[arg(long, value_name = "LIST")]
    envs: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: config key `jobs`: must be at least 1");
            return ExitCode::from(2);
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config_error = err
                .chain()
                .any(|cause| cause.downcast_ref::<Error>().is_some_and(Error::is_config));
            ExitCode::from(if config_error { 2 } else { 1 })
        }
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let flags = [
                ("env", args.env.is_some()),
                ("agent", args.agent.is_some()),
                ("episodes", args.episodes.is_some()),
                ("seeds", args.seeds.is_some()),
                ("variation", args.variation.is_some()),
            ];
            if let Some((flag, _)) = flags.iter().find(|(_, given)| *given) {
                return Err(Error::config(*flag, "conflicts with --config; set it in the file").into());
            }
            ExperimentConfig::from_file(path)?
        }
        None => config_from_flags(&args)?,
    };
    for item in &args.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::config("set", format!("expected KEY=VALUE, got `{item}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::config(key, format!("`{value}` is not a number")))?;
        config.agent.set(key, value)?;
    }
    let out = resolve_out(args.out, &config)?;
    config.output = Some(out.clone());
    config.validate()?;

    let start = Instant::now();
    let curves = run_experiment(&config)?;
    let aggregate = summarize(&curves)?;
    let extras = SummaryExtras {
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        grid_winner: None,
    };
    let files = export_results(&curves, &aggregate, &config, &extras, &out)?;
    eprintln!(
        "{} on {}: final mean cumulative regret {:.4} ± {:.4} over {} seeds ({:.1}s)",
        config.agent.kind,
        config.environment,
        aggregate.final_mean(),
        aggregate.final_ci(),
        aggregate.num_seeds,
        start.elapsed().as_secs_f64()
    );
    eprintln!("wrote {}", files.aggregate.display());
    Ok(())
}

fn config_from_flags(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let missing = |flag: &str| Error::config(flag, "missing (pass it or use --config)");
    let environment: EnvironmentId = args.env.as_deref().ok_or_else(|| missing("env"))?.parse()?;
    let kind: AgentKind = args.agent.as_deref().ok_or_else(|| missing("agent"))?.parse()?;
    let episodes = args.episodes.ok_or_else(|| missing("episodes"))?;
    let seeds = parse_seeds(args.seeds.as_deref().ok_or_else(|| missing("seeds"))?)?;
    let variation = VariationConfig::parse_spec(args.variation.as_deref().ok_or_else(|| missing("variation"))?)?;
    Ok(ExperimentConfig {
        environment,
        agent: AgentConfig::new(kind),
        variation,
        episodes,
        seeds,
        output: None,
    })
}

fn resolve_out(flag: Option<PathBuf>, config: &ExperimentConfig) -> Result<PathBuf, Error> {
    match (flag, &config.output) {
        (Some(flag), Some(file)) if &flag != file => Err(Error::config(
            "output",
            format!("config file says {}, --out says {}", file.display(), flag.display()),
        )),
        (Some(dir), _) => Ok(dir),
        (None, Some(dir)) => Ok(dir.clone()),
        (None, None) => Err(Error::config("out", "missing (pass --out or set `output`)")),
    }
}

fn cmd_grid(args: GridArgs) -> anyhow::Result<()> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    let grid = read_grid(&args.grid)?;
    let out = resolve_out(args.out, &config)?;
    config.output = Some(out.clone());
    let select_at = args.select_at.unwrap_or(config.episodes);

    let start = Instant::now();
    let outcome = grid_search(&config, &grid, select_at)?;
    let leaderboard = out.join(LEADERBOARD_FILE);
    write_leaderboard(&outcome.leaderboard, &leaderboard)?;
    let aggregate = summarize(&outcome.best_curves)?;
    let extras = SummaryExtras {
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        grid_winner: Some(outcome.best.clone()),
    };
    export_results(&outcome.best_curves, &aggregate, &outcome.best_config, &extras, &out)?;
    let winner: Vec<String> = outcome.best.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!(
        "best of {} points: {} (mean cumulative regret {:.4} at episode {select_at})",
        outcome.leaderboard.len(),
        winner.join(", "),
        outcome.leaderboard[0].metric
    );
    eprintln!("wrote {}", leaderboard.display());
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> anyhow::Result<()> {
    let figure: Figure = args.figure.parse()?;
    let mut options = ReproduceOptions::new(figure);
    options.episodes = args.episodes;
    options.seeds = parse_seeds(&args.seeds)?;
    if args.search {
        options.tuning = Tuning::Search;
    }
    if let Some(list) = &args.envs {
        options.environments = list
            .split(',')
            .map(|s| s.trim().parse::<EnvironmentId>())
            .collect::<Result<_, _>>()?;
    }
    let start = Instant::now();
    let report = reproduce(&options, &args.out)?;
    print_comparison(&report);
    eprintln!("finished in {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn print_comparison(report: &ReproduceReport) {
    println!(
        "{:<14} {:<7} {:>20} {:>20} {:>10}",
        "environment", "family", "baseline", "opportunistic", "reduction"
    );
    for c in &report.comparisons {
        println!(
            "{:<14} {:<7} {:>11.3} ± {:<6.3} {:>11.3} ± {:<6.3} {:>9.1}%",
            c.environment.name(),
            c.family.name(),
            c.baseline_mean,
            c.baseline_ci,
            c.opportunistic_mean,
            c.opportunistic_ci,
            100.0 * c.reduction()
        );
    }
    eprintln!("wrote {}", report.comparison_file.display());
}
