use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::agents::build_agent;
use crate::error::Result;
use crate::mdp::{FiniteHorizonMdp, Policy};
use crate::rng::RunStreams;

/// Regret of one seed's run, episode by episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub seed: u64,
    /// `L_k (V*_1 - V^{π_k}_1)` at the start state.
    pub per_episode_regret: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// The drawn `L_k`.
    pub variation_trace: Vec<f64>,
    /// Unweighted `V*_1 - V^{π_k}_1`.
    pub value_gap: Vec<f64>,
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.per_episode_regret.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_episode_regret.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn push(&mut self, level: f64, gap: f64) {
        let regret = level * gap;
        let total = self.final_regret() + regret;
        self.per_episode_regret.push(regret);
        self.cumulative.push(total);
        self.variation_trace.push(level);
        self.value_gap.push(gap);
    }
}

/// Expected regret of following `policy` for one episode weighted by `L_k`.
/// `optimal_value` is `V*_1` at the start state.
pub fn episode_regret(truth: &FiniteHorizonMdp, optimal_value: f64, policy: &Policy, level: f64) -> f64 {
    level * value_gap(truth, optimal_value, policy)
}

fn value_gap(truth: &FiniteHorizonMdp, optimal_value: f64, policy: &Policy) -> f64 {
    optimal_value - truth.evaluate_policy(policy).initial(truth.start_state())
}

pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<RegretCurve> {
    run_single_observed(config, seed, |_, _| {})
}

/// Like [`run_single`], also handing every planned policy to `on_policy`.
pub fn run_single_observed(
    config: &ExperimentConfig,
    seed: u64,
    mut on_policy: impl FnMut(usize, &Policy),
) -> Result<RegretCurve> {
    let truth = config.environment.build();
    let thresholds = config.variation.thresholds()?;
    let process = config.variation.process;
    let mut agent = build_agent(&config.agent, truth.shape())?;
    let optimal_value = truth.optimal_values().0.initial(truth.start_state());

    let mut streams = RunStreams::new(seed);
    let mut curve = RegretCurve {
        seed,
        per_episode_regret: Vec::with_capacity(config.episodes),
        cumulative: Vec::with_capacity(config.episodes),
        variation_trace: Vec::with_capacity(config.episodes),
        value_gap: Vec::with_capacity(config.episodes),
    };
    for k in 1..=config.episodes {
        let level = process.sample(k, &mut streams.variation);
        let normalized = thresholds.normalize(level);
        let policy = agent.plan(normalized, k, &mut streams.agent);
        on_policy(k, &policy);
        curve.push(level, value_gap(&truth, optimal_value, &policy));
        let trajectory = truth.run_episode(&policy, &mut streams.transitions);
        agent.observe(&trajectory);
    }
    Ok(curve)
}

/// One run per seed, in parallel; results come back in `config.seeds` order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RegretCurve>> {
    config.validate()?;
    config.seeds.par_iter().map(|&seed| run_single(config, seed)).collect()
}
