//! Episodic learning agents.
//!
//! Every agent follows the same loop: it is shown the normalized variation
//! factor `L̃_k` before episode `k`, returns the policy it will follow, and is
//! then handed the resulting trajectory.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ModelShape, Policy, Trajectory};
use crate::rng::SimRng;

pub mod counts;
pub mod evi;
pub mod psrl;
pub mod ucrl;

pub use counts::TransitionCounts;
pub use evi::{confidence_width, extended_value_iteration, inner_max_probability, EviOutput};
pub use psrl::{opp_psrl_plan, posterior_update, DirichletPosterior, PsrlAgent, PsrlConfig};
pub use ucrl::{opp_ucrl2_plan, OfuConfig, UcrlAgent};

pub trait EpisodicAgent: Send {
    fn name(&self) -> &'static str;

    /// Policy for episode `episode` (1-based) given `L̃_k`.
    fn plan(&mut self, normalized_variation: f64, episode: usize, rng: &mut SimRng) -> Policy;

    fn observe(&mut self, trajectory: &Trajectory);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Ucrl2,
    OppUcrl2,
    Psrl,
    OppPsrl,
}

/// UCRL2-style or PSRL-style, regardless of opportunism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentFamily {
    Ucrl2,
    Psrl,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [AgentKind::Ucrl2, AgentKind::OppUcrl2, AgentKind::Psrl, AgentKind::OppPsrl];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Ucrl2 => "ucrl2",
            AgentKind::OppUcrl2 => "opp_ucrl2",
            AgentKind::Psrl => "psrl",
            AgentKind::OppPsrl => "opp_psrl",
        }
    }

    pub fn is_opportunistic(self) -> bool {
        matches!(self, AgentKind::OppUcrl2 | AgentKind::OppPsrl)
    }

    pub fn family(self) -> AgentFamily {
        match self {
            AgentKind::Ucrl2 | AgentKind::OppUcrl2 => AgentFamily::Ucrl2,
            AgentKind::Psrl | AgentKind::OppPsrl => AgentFamily::Psrl,
        }
    }
}

impl AgentFamily {
    pub fn name(self) -> &'static str {
        match self {
            AgentFamily::Ucrl2 => "ucrl2",
            AgentFamily::Psrl => "psrl",
        }
    }

    pub fn baseline(self) -> AgentKind {
        match self {
            AgentFamily::Ucrl2 => AgentKind::Ucrl2,
            AgentFamily::Psrl => AgentKind::Psrl,
        }
    }

    pub fn opportunistic(self) -> AgentKind {
        match self {
            AgentFamily::Ucrl2 => AgentKind::OppUcrl2,
            AgentFamily::Psrl => AgentKind::OppPsrl,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::config(
                "agent.kind",
                format!("unknown agent `{s}` (expected ucrl2, opp_ucrl2, psrl or opp_psrl)"),
            )
        })
    }
}

/// Agent settings as they appear in configuration; each kind reads only the
/// fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::scale")]
    pub scale: f64,
    #[serde(default = "defaults::prior_value")]
    pub prior_value: f64,
    #[serde(default = "defaults::alpha_floor")]
    pub alpha_floor: f64,
}

pub mod defaults {
    pub fn delta() -> f64 {
        0.05
    }
    pub fn scale() -> f64 {
        1.0
    }
    pub fn prior_value() -> f64 {
        1.0
    }
    pub fn alpha_floor() -> f64 {
        1e-3
    }
}

impl AgentConfig {
    pub fn new(kind: AgentKind) -> Self {
        Self {
            kind,
            delta: defaults::delta(),
            scale: defaults::scale(),
            prior_value: defaults::prior_value(),
            alpha_floor: defaults::alpha_floor(),
        }
    }

    pub fn ofu(&self) -> OfuConfig {
        OfuConfig {
            delta: self.delta,
            scale: self.scale,
            opportunistic: self.kind.is_opportunistic(),
        }
    }

    pub fn psrl(&self) -> PsrlConfig {
        PsrlConfig {
            prior_value: self.prior_value,
            alpha_floor: self.alpha_floor,
            opportunistic: self.kind.is_opportunistic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind.family() {
            AgentFamily::Ucrl2 => self.ofu().validate(),
            AgentFamily::Psrl => self.psrl().validate(),
        }
    }

    /// Set a tunable parameter by its config key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "agent.delta" => &mut self.delta,
            "agent.scale" => &mut self.scale,
            "agent.prior_value" => &mut self.prior_value,
            "agent.alpha_floor" => &mut self.alpha_floor,
            _ => return Err(Error::config(key, "not a tunable agent parameter")),
        };
        *slot = value;
        Ok(())
    }

    /// Parameters that influence this kind of agent, by config key.
    pub fn tunable_keys(&self) -> &'static [&'static str] {
        match self.kind.family() {
            AgentFamily::Ucrl2 => &["agent.delta", "agent.scale"],
            AgentFamily::Psrl => &["agent.alpha_floor", "agent.prior_value"],
        }
    }
}

pub fn build_agent(config: &AgentConfig, shape: &ModelShape) -> Result<Box<dyn EpisodicAgent>> {
    Ok(match config.kind.family() {
        AgentFamily::Ucrl2 => Box::new(UcrlAgent::new(shape.clone(), config.ofu())?),
        AgentFamily::Psrl => Box::new(PsrlAgent::new(shape.clone(), config.psrl())?),
    })
}
