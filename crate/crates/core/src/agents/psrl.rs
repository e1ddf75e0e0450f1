//! Posterior sampling (PSRL) with Dirichlet transition posteriors, and the
//! opportunistic variant that rescales the concentration by `L̃_k` before
//! each draw.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::EpisodicAgent;
use crate::error::{Error, Result};
use crate::mdp::{solve_backward, ModelShape, Policy, Trajectory};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsrlConfig {
    /// Initial concentration for every `(s, a, s')`.
    pub prior_value: f64,
    /// Lower bound on a rescaled concentration.
    pub alpha_floor: f64,
    pub opportunistic: bool,
}

impl PsrlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_value > 0.0 && self.prior_value.is_finite()) {
            return Err(Error::config(
                "agent.prior_value",
                format!("must be positive, got {}", self.prior_value),
            ));
        }
        if !(self.alpha_floor > 0.0 && self.alpha_floor.is_finite()) {
            return Err(Error::config(
                "agent.alpha_floor",
                format!("must be positive, got {}", self.alpha_floor),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPosterior {
    num_states: usize,
    num_actions: usize,
    prior_value: f64,
    concentration: Vec<f64>,
}

impl DirichletPosterior {
    pub fn new(num_states: usize, num_actions: usize, prior_value: f64) -> Self {
        assert!(prior_value > 0.0, "Dirichlet prior must be positive");
        Self {
            num_states,
            num_actions,
            prior_value,
            concentration: vec![prior_value; num_states * num_actions * num_states],
        }
    }

    pub fn prior_value(&self) -> f64 {
        self.prior_value
    }

    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    pub fn alpha(&self, state: usize, action: usize, next: usize) -> f64 {
        self.concentration[(state * self.num_actions + action) * self.num_states + next]
    }

    /// Conjugate update: one count per observed transition.
    pub fn update(&mut self, trajectory: &Trajectory) {
        for t in trajectory {
            self.concentration[(t.state * self.num_actions + t.action) * self.num_states + t.next_state] += 1.0;
        }
    }

    /// Posterior mean of `P(.|s, a)`.
    pub fn mean_row(&self, state: usize, action: usize) -> Vec<f64> {
        let base = (state * self.num_actions + action) * self.num_states;
        let row = &self.concentration[base..base + self.num_states];
        let total: f64 = row.iter().sum();
        row.iter().map(|a| a / total).collect()
    }

    /// Draw a full transition tensor, each row from `Dirichlet(f(alpha))`
    /// where `f` maps the stored concentration to the one sampled from.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.concentration.len()];
        let mut scaled = vec![0.0; self.num_states];
        for (row, dst) in self
            .concentration
            .chunks(self.num_states)
            .zip(out.chunks_mut(self.num_states))
        {
            scaled.iter_mut().zip(row).for_each(|(x, &a)| *x = f(a));
            sample_dirichlet_into(&scaled, rng, dst);
        }
        out
    }
}

/// One Dirichlet draw via normalized Gamma variates, one per component in
/// ascending order. Works in log space so that tiny concentrations, whose
/// Gamma variates underflow, still yield a valid row.
pub fn sample_dirichlet_into<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R, out: &mut [f64]) {
    for (o, &a) in out.iter_mut().zip(alpha) {
        *o = log_gamma_variate(a, rng);
    }
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// `ln X` for `X ~ Gamma(shape, 1)`. Shapes below one use
/// `X = Y U^(1/shape)` with `Y ~ Gamma(shape + 1, 1)`.
fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
    } else {
        let y = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        // `random` is in [0, 1); flip to (0, 1] so the log stays finite.
        let u = 1.0 - rng.random::<f64>();
        y.ln() + u.ln() / shape
    }
}

/// Sample an MDP from the (optionally rescaled) posterior and solve it exactly.
pub fn opp_psrl_plan<R: Rng + ?Sized>(
    posterior: &DirichletPosterior,
    normalized_variation: f64,
    config: &PsrlConfig,
    shape: &ModelShape,
    rng: &mut R,
) -> Policy {
    let transitions = if config.opportunistic {
        let floor = config.alpha_floor;
        posterior.sample_with(rng, |a| (normalized_variation * a).max(floor))
    } else {
        posterior.sample_with(rng, |a| a)
    };
    solve_backward(shape, &transitions).1
}

pub fn posterior_update(posterior: &mut DirichletPosterior, trajectory: &Trajectory) {
    posterior.update(trajectory)
}

#[derive(Debug, Clone)]
pub struct PsrlAgent {
    shape: ModelShape,
    config: PsrlConfig,
    posterior: DirichletPosterior,
}

impl PsrlAgent {
    pub fn new(shape: ModelShape, config: PsrlConfig) -> Result<Self> {
        config.validate()?;
        let posterior = DirichletPosterior::new(shape.num_states, shape.num_actions, config.prior_value);
        Ok(Self {
            shape,
            config,
            posterior,
        })
    }

    pub fn posterior(&self) -> &DirichletPosterior {
        &self.posterior
    }
}

impl EpisodicAgent for PsrlAgent {
    fn name(&self) -> &'static str {
        if self.config.opportunistic {
            "opp_psrl"
        } else {
            "psrl"
        }
    }

    fn plan(&mut self, normalized_variation: f64, _episode: usize, rng: &mut SimRng) -> Policy {
        opp_psrl_plan(&self.posterior, normalized_variation, &self.config, &self.shape, rng)
    }

    fn observe(&mut self, trajectory: &Trajectory) {
        self.posterior.update(trajectory);
    }
}
