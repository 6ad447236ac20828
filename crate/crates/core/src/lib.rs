//! Deterministic crowd-navigation simulator.
//!
//! A unicycle robot navigates among humans driven by reciprocal collision
//! avoidance. Humans carry a hidden personal-space radius that they keep
//! clear of others; the robot is scored by a navigation reward plus the
//! rewards that nearby humans give it. The crate also provides seeded
//! scenario generators, JSONL episode logs and the metric suite computed
//! from them.

pub mod crowd;
pub mod env;
pub mod error;
pub mod geometry;
pub mod log;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod orca;
pub mod policy;
pub mod reward;
pub mod scenario;

pub use env::{Action, EnvConfig, Environment, Observation, StepInfo, StepResult};
pub use error::{Error, Result};
pub use geometry::Vec2;
pub use log::{EpisodeLog, StepRecord};
pub use lp::{solve_velocity, HalfPlane};
pub use metrics::{aggregate, episode_metrics, EpisodeMetrics, Summary};
pub use model::{
    proxemic_violation, surface_distance, AgentKind, AgentState, HiddenState, ObservableState,
    Termination, WorldState,
};
pub use orca::{OrcaMode, OrcaParams};
pub use policy::{run_episode, ScriptedPolicy};
pub use reward::{RewardBreakdown, RewardConfig, SocialMode};
pub use scenario::{ScenarioConfig, ScenarioGenerator, ScenarioKind, ScenarioSource};
