//! Acceptance suite: one line per criterion, `PASS` or `FAIL`.
//!
//! Criteria listed in `KNOWN_FAILURES` were measured to fail and are reported
//! as such; the process exits nonzero if any other criterion fails or if a
//! known failure starts passing.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use opprl_core::agents::evi::{descending_order, extended_value_iteration, inner_max_probability};
use opprl_core::agents::{confidence_width, AgentFamily};
use opprl_core::experiment::presets::tuned_agent;
use opprl_core::experiment::{default_grid, grid_search, run_single_observed};
use opprl_core::{
    run_experiment, AgentConfig, AgentKind, EnvironmentId, ExperimentConfig, ModelShape, SimRng, VariationConfig,
    VariationProcess,
};
use oracles::{binomial_lower_tail, brute_force_optimum, forward_value, l1_ball_lp_max, l1_distance, random_mdp, random_row};
use rand::{Rng, SeedableRng};

const KNOWN_FAILURES: [(u32, &str); 2] = [
    (
        3,
        "OppPSRL's L̃-scaled Dirichlet draws ignore the data when L̃ = 0, so it trails tuned PSRL; \
         OppUCRL2's reductions exceed the reference by more than 20 points on two environments",
    ),
    (5, "OppPSRL trails PSRL on all three environments under Beta(2, 2) variation"),
];

const ENVS: [EnvironmentId; 3] = EnvironmentId::ALL;

struct Outcome {
    passed: bool,
    detail: String,
}

fn main() {
    let scratch = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        results.push((id, name, outcome, start.elapsed().as_secs_f64()));
        let (id, name, outcome, secs) = results.last().unwrap();
        print_line(*id, name, outcome, *secs);
    };

    record(1, "optimal values match policy enumeration", &mut oracle_equivalence);
    record(2, "optimistic backup matches the LP oracle", &mut evi_correctness);

    let binary_a = scratch.path().join("binary_a");
    let binary_b = scratch.path().join("binary_b");
    let beta = scratch.path().join("beta");
    let binary_secs = reproduce("binary", &binary_a);
    let binary = Matrix::load(&binary_a);
    record(3, "binary reductions after grid search", &mut || binary_reduction(&binary, binary_secs));
    record(4, "OppUCRL2 regret flattens (binary)", &mut || flattening(&binary));
    reproduce("beta", &beta);
    let beta_matrix = Matrix::load(&beta);
    record(5, "Beta(2,2) opportunistic agents beat baselines", &mut || beta_direction(&beta_matrix));
    record(6, "L1 confidence set covers the truth", &mut coverage);
    record(7, "square-wave regret splits by parity", &mut decomposition);
    record(8, "UCRL2 regret is sublinear", &mut sublinearity);
    reproduce("binary", &binary_b);
    record(9, "reproduce is byte-identical", &mut || determinism(&binary_a, &binary_b));

    let tuning = preset_matches_search();
    println!("note: {}", tuning.detail);

    let mut unexpected = Vec::new();
    for (id, _, outcome, _) in &results {
        let known = KNOWN_FAILURES.iter().any(|(k, _)| k == id);
        if outcome.passed == known {
            unexpected.push(*id);
        }
    }
    if !tuning.passed {
        unexpected.push(0);
    }
    let passed = results.iter().filter(|r| r.2.passed).count();
    println!("\n{passed}/{} criteria passed", results.len());
    if unexpected.is_empty() {
        println!("all failures are the known ones");
    } else {
        println!("unexpected results for {unexpected:?}");
        std::process::exit(1);
    }
}

fn print_line(id: u32, name: &str, outcome: &Outcome, secs: f64) {
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!("[{status}] {id}. {name} ({secs:.1}s): {}", outcome.detail);
    if !outcome.passed {
        if let Some((_, why)) = KNOWN_FAILURES.iter().find(|(k, _)| *k == id) {
            println!("       known failure: {why}");
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = SimRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mdp = random_mdp(&mut rng, 3, 2, 3);
        let (values, _) = mdp.optimal_values();
        for s in 0..mdp.num_states() {
            worst = worst.max((values.initial(s) - brute_force_optimum(&mdp, s)).abs());
        }
    }
    Outcome {
        passed: worst <= 1e-9,
        detail: format!("100 random models, max |error| = {worst:.2e}"),
    }
}

fn evi_correctness() -> Outcome {
    let mut rng = SimRng::seed_from_u64(2025);
    let mut worst: f64 = 0.0;
    let mut invariants = true;
    for _ in 0..1000 {
        let p_hat = random_row(&mut rng, 4);
        let values: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..5.0)).collect();
        let d = rng.random_range(0.0..2.2);
        let row = inner_max_probability(&p_hat, d, &descending_order(&values));
        let got: f64 = row.iter().zip(&values).map(|(p, v)| p * v).sum();
        worst = worst.max((got - l1_ball_lp_max(&p_hat, d, &values)).abs());
        invariants &= simplex_and_ball(&row, &p_hat, d);
    }
    // Rows produced inside full planning passes.
    for _ in 0..50 {
        let s = 4;
        let p_hat: Vec<f64> = (0..s * 2).flat_map(|_| random_row(&mut rng, s)).collect();
        let widths: Vec<f64> = (0..s * 2).map(|_| rng.random_range(0.0..2.0)).collect();
        let shape = ModelShape {
            num_states: s,
            num_actions: 2,
            horizon: 4,
            rewards: (0..s * 2).map(|_| rng.random::<f64>()).collect(),
            discount: 1.0,
        };
        let evi = extended_value_iteration(&p_hat, &widths, &shape);
        for pair in 0..s * 2 {
            let range = pair * s..(pair + 1) * s;
            invariants &= simplex_and_ball(&evi.optimistic[range.clone()], &p_hat[range], widths[pair]);
        }
    }
    Outcome {
        passed: worst <= 1e-9 && invariants,
        detail: format!("1000 rows, max |error| = {worst:.2e}, simplex and ball hold: {invariants}"),
    }
}

fn simplex_and_ball(row: &[f64], p_hat: &[f64], d: f64) -> bool {
    row.iter().all(|&p| p >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() < 1e-12 && l1_distance(row, p_hat) <= d + 1e-12
}

fn reproduce(figure: &str, out: &Path) -> f64 {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_opprl"))
        .args(["reproduce", "--figure", figure, "--out"])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success(), "reproduce --figure {figure} failed");
    start.elapsed().as_secs_f64()
}

/// Aggregate curves of one matrix run, read straight from the CSV files.
struct Matrix {
    curves: BTreeMap<(String, String), (Vec<f64>, Vec<f64>)>,
}

impl Matrix {
    fn load(dir: &Path) -> Self {
        let mut curves = BTreeMap::new();
        for env in ENVS {
            for kind in AgentKind::ALL {
                let path = dir.join(env.name()).join(kind.name()).join("aggregate.csv");
                let mut reader = csv::Reader::from_path(&path).expect("aggregate file");
                let (mut mean, mut ci) = (Vec::new(), Vec::new());
                for record in reader.records() {
                    let record = record.unwrap();
                    mean.push(record[1].parse::<f64>().unwrap());
                    ci.push(record[2].parse::<f64>().unwrap());
                }
                curves.insert((env.name().to_string(), kind.name().to_string()), (mean, ci));
            }
        }
        Self { curves }
    }

    fn final_of(&self, env: EnvironmentId, kind: AgentKind) -> (f64, f64) {
        let (mean, ci) = &self.curves[&(env.name().to_string(), kind.name().to_string())];
        (*mean.last().unwrap(), *ci.last().unwrap())
    }

    fn mean_at(&self, env: EnvironmentId, kind: AgentKind, episode: usize) -> f64 {
        self.curves[&(env.name().to_string(), kind.name().to_string())].0[episode - 1]
    }
}

fn binary_reduction(m: &Matrix, secs: f64) -> Outcome {
    let reference = [
        (AgentFamily::Ucrl2, [12.7, 25.9, 23.7]),
        (AgentFamily::Psrl, [29.1, 13.3, 81.9]),
    ];
    let mut ok = secs < 15.0 * 60.0;
    let mut parts = Vec::new();
    for (family, targets) in reference {
        for (env, target) in ENVS.iter().zip(targets) {
            let base = m.final_of(*env, family.baseline()).0;
            let opp = m.final_of(*env, family.opportunistic()).0;
            let got = 100.0 * (base - opp) / base;
            let cell = got > 0.0 && (got - target).abs() <= 20.0;
            ok &= cell;
            parts.push(format!(
                "{}/{} {got:.1}% (ref {target}%){}",
                family.opportunistic(),
                env,
                if cell { "" } else { " x" }
            ));
        }
    }
    Outcome {
        passed: ok,
        detail: format!("{}; matrix took {secs:.0}s", parts.join(", ")),
    }
}

fn flattening(m: &Matrix) -> Outcome {
    let mut flat = 0;
    let mut parts = Vec::new();
    for env in ENVS {
        let total = m.mean_at(env, AgentKind::OppUcrl2, 1000);
        let late = total - m.mean_at(env, AgentKind::OppUcrl2, 800);
        let share = if total > 0.0 { late / total } else { 0.0 };
        if share < 0.02 {
            flat += 1;
        }
        parts.push(format!("{env} {:.2}%", 100.0 * share));
    }
    Outcome {
        passed: flat >= 2,
        detail: format!("share of regret in episodes 801-1000: {}", parts.join(", ")),
    }
}

fn beta_direction(m: &Matrix) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for family in [AgentFamily::Ucrl2, AgentFamily::Psrl] {
        for env in ENVS {
            let (base, base_ci) = m.final_of(env, family.baseline());
            let (opp, _) = m.final_of(env, family.opportunistic());
            let cell = if env == EnvironmentId::FrozenLake && family == AgentFamily::Ucrl2 {
                opp <= base + base_ci
            } else {
                opp < base
            };
            ok &= cell;
            parts.push(format!(
                "{}/{env} {:.1}%{}",
                family.opportunistic(),
                100.0 * (base - opp) / base,
                if cell { "" } else { " x" }
            ));
        }
    }
    Outcome {
        passed: ok,
        detail: parts.join(", "),
    }
}

fn coverage() -> Outcome {
    // Three states, two actions.
    let truth = [
        [0.7, 0.2, 0.1],
        [0.1, 0.1, 0.8],
        [0.3, 0.3, 0.4],
        [0.0, 0.5, 0.5],
        [0.05, 0.9, 0.05],
        [1.0, 0.0, 0.0],
    ];
    let (s, a, delta, trials) = (3, 2, 0.05, 200u64);
    let mut rng = SimRng::seed_from_u64(2026);
    let mut worst_rate: f64 = 1.0;
    let mut worst_p: f64 = 1.0;
    for row in truth {
        for n in [1u64, 5, 20, 100] {
            let t_k = 10 * n;
            let mut inside = 0;
            for _ in 0..trials {
                let mut counts = [0u64; 3];
                for _ in 0..n {
                    let u: f64 = rng.random();
                    let mut next = 2;
                    let mut acc = 0.0;
                    for (j, p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            next = j;
                            break;
                        }
                    }
                    counts[next] += 1;
                }
                let p_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
                let d = confidence_width(n, s, a, t_k, delta, 0.0, 1.0);
                if l1_distance(&p_hat, &row) <= d {
                    inside += 1;
                }
            }
            worst_rate = worst_rate.min(inside as f64 / trials as f64);
            worst_p = worst_p.min(binomial_lower_tail(inside, trials, 1.0 - delta));
        }
    }
    Outcome {
        passed: worst_p >= 1e-3,
        detail: format!(
            "6 pairs x 4 sample sizes x {trials} draws: lowest coverage {:.1}%, smallest one-sided p = {worst_p:.3}",
            100.0 * worst_rate
        ),
    }
}

fn decomposition() -> Outcome {
    let truth = opprl_core::river_swim();
    let start = truth.start_state();
    let optimum = truth.optimal_values().0.initial(start);
    let (eps0, eps1) = (0.1, 0.2);
    let mut worst: f64 = 0.0;
    for kind in AgentKind::ALL {
        let config = ExperimentConfig {
            environment: EnvironmentId::RiverSwim,
            agent: AgentConfig::new(kind),
            variation: VariationConfig::new(VariationProcess::PeriodicSquareWave { eps0, eps1 }),
            episodes: 200,
            seeds: vec![1],
            output: None,
        };
        for seed in 1..=5 {
            let mut even = 0.0;
            let mut odd = 0.0;
            let curve = run_single_observed(&config, seed, |k, policy| {
                let gap = optimum - forward_value(&truth, policy, start);
                if k % 2 == 0 {
                    even += gap;
                } else {
                    odd += gap;
                }
            })
            .unwrap();
            let split = eps0 * even + (1.0 - eps1) * odd;
            worst = worst.max((curve.final_regret() - split).abs());
        }
    }
    Outcome {
        passed: worst <= 1e-9,
        detail: format!("4 agents x 5 seeds, K = 200, max |total - split| = {worst:.2e}"),
    }
}

fn sublinearity() -> Outcome {
    let config = ExperimentConfig {
        environment: EnvironmentId::RiverSwim,
        agent: AgentConfig::new(AgentKind::Ucrl2),
        variation: VariationConfig::new(VariationProcess::Constant { value: 1.0 }),
        episodes: 4000,
        seeds: (1..=20).collect(),
        output: None,
    };
    let curves = run_experiment(&config).unwrap();
    let mean_at = |k: usize| curves.iter().map(|c| c.cumulative[k - 1]).sum::<f64>() / curves.len() as f64;
    let (r1, r4) = (mean_at(1000), mean_at(4000));
    Outcome {
        passed: r4 < 3.0 * r1,
        detail: format!("mean regret {r1:.2} at K = 1000, {r4:.2} at K = 4000 (ratio {:.2})", r4 / r1),
    }
}

fn csv_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(a: &Path, b: &Path) -> Outcome {
    let files = csv_files(a);
    let same_set = files == csv_files(b);
    let differing: Vec<_> = files
        .iter()
        .filter(|rel| fs::read(a.join(rel)).ok() != fs::read(b.join(rel)).ok())
        .collect();
    Outcome {
        passed: same_set && differing.is_empty() && files.len() == 25,
        detail: format!("{} CSV files compared, {} differ", files.len(), differing.len()),
    }
}

/// The preset agent settings agree with a fresh search on the two smaller
/// environments.
fn preset_matches_search() -> Outcome {
    let mut mismatches = Vec::new();
    for env in [EnvironmentId::RiverSwim, EnvironmentId::FrozenLake] {
        for kind in AgentKind::ALL {
            let base = ExperimentConfig {
                environment: env,
                agent: AgentConfig::new(kind),
                variation: VariationConfig::new(VariationProcess::BinaryIid { eps0: 0.0, eps1: 0.0, rho: 0.5 }),
                episodes: 1000,
                seeds: (1..=20).collect(),
                output: None,
            };
            let outcome = grid_search(&base, &default_grid(kind.family()), 1000).unwrap();
            if outcome.best_config.agent != tuned_agent(env, kind) {
                mismatches.push(format!("{env}/{kind}"));
            }
        }
    }
    Outcome {
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "preset settings equal fresh grid-search winners on river_swim and frozen_lake".into()
        } else {
            format!("preset settings differ from grid-search winners for {mismatches:?}")
        },
    }
}
