//! UCRL2 and its opportunistic variant for finite-horizon episodes.

use super::counts::TransitionCounts;
use super::evi::{confidence_width, extended_value_iteration, EviOutput};
use super::EpisodicAgent;
use crate::error::{Error, Result};
use crate::mdp::{ModelShape, Policy, Trajectory};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfuConfig {
    pub delta: f64,
    /// Multiplier on every confidence width.
    pub scale: f64,
    pub opportunistic: bool,
}

impl OfuConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config("agent.delta", format!("must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::config("agent.scale", format!("must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

/// Per-pair widths `d_k(s, a)` for episode `k` (1-based, `t_k = H (k - 1)`).
pub fn confidence_widths(
    counts: &TransitionCounts,
    normalized_variation: f64,
    episode: usize,
    shape: &ModelShape,
    config: &OfuConfig,
) -> Vec<f64> {
    let level = if config.opportunistic { normalized_variation } else { 0.0 };
    let t_k = (shape.horizon * episode.saturating_sub(1)) as u64;
    let mut widths = Vec::with_capacity(shape.num_states * shape.num_actions);
    for s in 0..shape.num_states {
        for a in 0..shape.num_actions {
            widths.push(confidence_width(
                counts.pair(s, a),
                shape.num_states,
                shape.num_actions,
                t_k,
                config.delta,
                level,
                config.scale,
            ));
        }
    }
    widths
}

/// Optimistic plan for episode `k` from the counts gathered so far.
pub fn opp_ucrl2_plan_full(
    counts: &TransitionCounts,
    normalized_variation: f64,
    episode: usize,
    shape: &ModelShape,
    config: &OfuConfig,
) -> EviOutput {
    let p_hat = counts.empirical_transitions();
    let widths = confidence_widths(counts, normalized_variation, episode, shape, config);
    extended_value_iteration(&p_hat, &widths, shape)
}

pub fn opp_ucrl2_plan(
    counts: &TransitionCounts,
    normalized_variation: f64,
    episode: usize,
    shape: &ModelShape,
    config: &OfuConfig,
) -> Policy {
    opp_ucrl2_plan_full(counts, normalized_variation, episode, shape, config).policy
}

#[derive(Debug, Clone)]
pub struct UcrlAgent {
    shape: ModelShape,
    config: OfuConfig,
    counts: TransitionCounts,
}

impl UcrlAgent {
    pub fn new(shape: ModelShape, config: OfuConfig) -> Result<Self> {
        config.validate()?;
        let counts = TransitionCounts::new(shape.num_states, shape.num_actions);
        Ok(Self { shape, config, counts })
    }

    pub fn counts(&self) -> &TransitionCounts {
        &self.counts
    }

    pub fn config(&self) -> &OfuConfig {
        &self.config
    }
}

impl EpisodicAgent for UcrlAgent {
    fn name(&self) -> &'static str {
        if self.config.opportunistic {
            "opp_ucrl2"
        } else {
            "ucrl2"
        }
    }

    fn plan(&mut self, normalized_variation: f64, episode: usize, _rng: &mut SimRng) -> Policy {
        opp_ucrl2_plan(&self.counts, normalized_variation, episode, &self.shape, &self.config)
    }

    fn observe(&mut self, trajectory: &Trajectory) {
        self.counts.record_trajectory(trajectory);
    }
}
