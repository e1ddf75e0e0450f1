//! Opportunistic episodic reinforcement learning on finite-horizon tabular
//! MDPs.
//!
//! An external variation factor `L_k` weights the regret of episode `k`.
//! The opportunistic agents ([`AgentKind::OppUcrl2`], [`AgentKind::OppPsrl`])
//! see the normalized factor before planning and explore less when it is
//! high; their baselines ignore it.
//!
//! ```
//! use opprl_core::{run_single, AgentConfig, AgentKind, EnvironmentId, ExperimentConfig,
//!     VariationConfig, VariationProcess};
//!
//! let config = ExperimentConfig {
//!     environment: EnvironmentId::RiverSwim,
//!     agent: AgentConfig::new(AgentKind::OppUcrl2),
//!     variation: VariationConfig::new(VariationProcess::BinaryIid { eps0: 0.0, eps1: 0.0, rho: 0.5 }),
//!     episodes: 20,
//!     seeds: vec![1],
//!     output: None,
//! };
//! let curve = run_single(&config, 1).unwrap();
//! assert_eq!(curve.cumulative.len(), 20);
//! ```

pub mod agents;
pub mod env;
pub mod error;
pub mod experiment;
pub mod mdp;
pub mod rng;
pub mod variation;

pub use agents::{build_agent, AgentConfig, AgentFamily, AgentKind, EpisodicAgent};
pub use env::{cliff_walking, frozen_lake, river_swim, EnvironmentId};
pub use error::{Error, Result};
pub use experiment::{
    aggregate, export_results, grid_search, reproduce, run_experiment, run_single, summarize, AggregateCurve,
    ExperimentConfig, Figure, RegretCurve, ReproduceOptions, ReproduceReport, VariationConfig,
};
pub use mdp::{build_mdp, FiniteHorizonMdp, MdpSpec, ModelShape, Policy, Trajectory, Transition, ValueTable};
pub use rng::{RunStreams, SimRng, Stream};
pub use variation::{normalize, quantile_thresholds, NormalizationThresholds, VariationProcess};
