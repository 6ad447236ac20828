//! The navigation environment: a unicycle robot among ORCA humans.
//!
//! One [`Environment`] is a single-caller state machine. `reset` loads a
//! scenario, `step` applies one robot action, moves every human from the
//! pre-step snapshot, scores the result and returns the next observation.
//! Every step is also appended to an in-memory [`EpisodeLog`].

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_4;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use crate::log::{AgentSnapshot, EpisodeLog, LogHeader, StepRecord, LOG_SCHEMA};
use crate::model::{
    proxemic_violation, surface_distance, AgentKind, AgentState, HiddenState, ObservableState,
    Termination, WorldState,
};
use crate::orca::{human_policy_step, OrcaMode, OrcaParams};
use crate::reward::{human_discomfort, total_reward, RewardBreakdown, RewardConfig, SocialMode};
use crate::scenario::ScenarioConfig;

/// Scalars in the robot part of an observation.
pub const ROBOT_SELF_LEN: usize = 6;
/// Scalars in the constant part of a per-human observation.
pub const HUMAN_STATIC_LEN: usize = 2;
/// Scalars in one temporal frame.
pub const FRAME_LEN: usize = 5;

/// Robot command: forward speed and heading change for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub v: f64,
    pub dtheta: f64,
}

impl Action {
    pub fn new(v: f64, dtheta: f64) -> Self {
        Action { v, dtheta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub dt: f64,
    /// Number of past frames kept in addition to the current one.
    pub k: usize,
    pub timeout: f64,
    pub dtheta_max: f64,
    pub goal_tolerance: f64,
    /// Humans hold still once this close to their goal.
    pub human_goal_tolerance: f64,
    pub reward: RewardConfig,
    /// Time horizon used by humans; cooperation and speed come from the
    /// scenario, the step from `dt`.
    pub human_orca: OrcaParams,
    pub human_mode: OrcaMode,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dt: 0.2,
            k: 15,
            timeout: 30.0,
            dtheta_max: FRAC_PI_4,
            goal_tolerance: 0.3,
            human_goal_tolerance: 0.3,
            reward: RewardConfig::default(),
            human_orca: OrcaParams::default(),
            human_mode: OrcaMode::SociallyIntegrated,
        }
    }
}

impl EnvConfig {
    pub fn mode(&self) -> SocialMode {
        self.reward.mode
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("timeout", self.timeout),
            ("dtheta_max", self.dtheta_max),
            ("goal_tolerance", self.goal_tolerance),
            ("human_orca.time_horizon", self.human_orca.time_horizon),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {value}")));
            }
        }
        if self.human_goal_tolerance.is_nan() || self.human_goal_tolerance < 0.0 {
            return Err(Error::Config(
                "human_goal_tolerance must be >= 0".to_string(),
            ));
        }
        self.reward.validate().map_err(Error::Config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: EnvConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Steps until the episode times out.
    pub fn max_steps(&self) -> u64 {
        (self.timeout / self.dt - 1e-9).ceil().max(1.0) as u64
    }

    pub fn human_block_len(&self) -> usize {
        HUMAN_STATIC_LEN + FRAME_LEN * (self.k + 1)
    }
}

/// Relative robot-human state at one instant:
/// `[distance, dp.x, dp.y, dv.x, dv.y]` with `dp = p_robot - p_human` and
/// `dv = v_robot - v_human`.
pub type Frame = [f64; FRAME_LEN];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanObservation {
    /// `[r_i, r_i + r_robot]`.
    pub static_part: [f64; HUMAN_STATIC_LEN],
    /// `k + 1` frames, newest first.
    pub frames: Vec<Frame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// `[d_goal, dp_goal.x, dp_goal.y, heading, v_pref, radius]`.
    pub robot_self: [f64; ROBOT_SELF_LEN],
    /// In world index order.
    pub humans: Vec<HumanObservation>,
}

impl Observation {
    /// Flat layout: robot part, then each human's static part followed by
    /// its frames newest-first.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        self.flatten_into(&mut out);
        out
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.robot_self);
        for h in &self.humans {
            out.extend_from_slice(&h.static_part);
            for f in &h.frames {
                out.extend_from_slice(f);
            }
        }
    }

    pub fn flat_len(&self) -> usize {
        ROBOT_SELF_LEN
            + self
                .humans
                .iter()
                .map(|h| HUMAN_STATIC_LEN + FRAME_LEN * h.frames.len())
                .sum::<usize>()
    }
}

/// Per-human history buffers, newest frame first.
#[derive(Clone, Debug, Default)]
pub struct History {
    frames: Vec<VecDeque<Frame>>,
    capacity: usize,
}

impl History {
    pub fn new(n_humans: usize, k: usize) -> Self {
        History {
            frames: vec![VecDeque::with_capacity(k + 1); n_humans],
            capacity: k + 1,
        }
    }

    /// Records the current frame of every human in `world`.
    pub fn push(&mut self, world: &WorldState) {
        let robot = world.robot();
        for (slot, (_, human)) in self.frames.iter_mut().zip(world.humans()) {
            if slot.len() == self.capacity {
                slot.pop_back();
            }
            slot.push_front(relative_frame(robot, human));
        }
    }

    pub fn len(&self, human: usize) -> usize {
        self.frames[human].len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.iter().all(|f| f.is_empty())
    }
}

pub fn relative_frame(robot: &AgentState, human: &AgentState) -> Frame {
    let dp = robot.position() - human.position();
    let dv = robot.velocity() - human.velocity();
    [dp.norm(), dp.x, dp.y, dv.x, dv.y]
}

/// Builds the observation from observable quantities only: the robot's own
/// state plus the recorded relative frames. Short histories are padded by
/// repeating the oldest frame.
pub fn build_observation(world: &WorldState, history: &History, k: usize) -> Observation {
    let robot = world.robot();
    let to_goal = robot.hidden.goal - robot.position();
    let robot_self = [
        to_goal.norm(),
        to_goal.x,
        to_goal.y,
        robot.heading,
        robot.hidden.v_pref,
        robot.radius(),
    ];
    let humans = world
        .humans()
        .zip(&history.frames)
        .map(|((_, human), recorded)| {
            let oldest = *recorded.back().expect("history primed");
            let frames = (0..=k)
                .map(|t| recorded.get(t).copied().unwrap_or(oldest))
                .collect();
            HumanObservation {
                static_part: [human.radius(), human.radius() + robot.radius()],
                frames,
            }
        })
        .collect();
    Observation { robot_self, humans }
}

/// Side information returned with each step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Each human's own reward for the robot (speed mismatch and personal
    /// space), regardless of the integration radius.
    pub human_rewards: Vec<f64>,
    /// Whether the robot is inside each human's personal space.
    pub violations: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub reward_breakdown: RewardBreakdown,
    pub termination: Termination,
    pub info: StepInfo,
}

/// Builds the world for a scenario: headings face the goal, velocities are
/// zero, the robot's personal space follows the reward mode.
pub fn initial_world(scenario: &ScenarioConfig, config: &EnvConfig) -> WorldState {
    let agents = scenario
        .agents
        .iter()
        .map(|spec| {
            let r_prox = match (spec.kind, config.mode()) {
                (AgentKind::Robot, SocialMode::SociallyIntegrated) => 0.0,
                (AgentKind::Robot, SocialMode::SociallyAware) => config.reward.r0_prox,
                (AgentKind::Human, _) => spec.r_prox,
            };
            AgentState {
                observable: ObservableState {
                    position: spec.start,
                    velocity: Vec2::ZERO,
                    radius: spec.radius,
                },
                hidden: HiddenState {
                    goal: spec.goal,
                    v_pref: spec.v_pref,
                    psi_pref: spec.psi_pref,
                    r_prox,
                },
                heading: (spec.goal - spec.start).angle(),
                kind: spec.kind,
            }
        })
        .collect();
    WorldState {
        agents,
        time: 0.0,
        step: 0,
    }
}

#[derive(Clone)]
pub struct Environment {
    config: EnvConfig,
    scenario: Option<ScenarioConfig>,
    world: WorldState,
    orca_params: Vec<OrcaParams>,
    history: History,
    termination: Termination,
    log: Option<EpisodeLog>,
    policy_label: Option<String>,
}

impl Environment {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Environment {
            config,
            scenario: None,
            world: WorldState {
                agents: Vec::new(),
                time: 0.0,
                step: 0,
            },
            orca_params: Vec::new(),
            history: History::default(),
            termination: Termination::Running,
            log: None,
            policy_label: None,
        })
    }

    /// Name recorded in the log header of subsequent episodes.
    pub fn set_policy_label(&mut self, label: impl Into<String>) {
        self.policy_label = Some(label.into());
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn scenario(&self) -> Option<&ScenarioConfig> {
        self.scenario.as_ref()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn n_humans(&self) -> usize {
        self.world.human_count()
    }

    /// Length of the flattened observation for the loaded scenario.
    pub fn observation_len(&self) -> usize {
        ROBOT_SELF_LEN + self.n_humans() * self.config.human_block_len()
    }

    pub fn observation(&self) -> Observation {
        build_observation(&self.world, &self.history, self.config.k)
    }

    /// Log of the current episode so far.
    pub fn log(&self) -> Option<&EpisodeLog> {
        self.log.as_ref()
    }

    pub fn take_log(&mut self) -> Option<EpisodeLog> {
        self.log.take()
    }

    pub fn reset(&mut self, scenario: &ScenarioConfig, seed: u64) -> Result<Observation> {
        scenario.validate()?;
        self.world = initial_world(scenario, &self.config);
        self.orca_params = scenario
            .agents
            .iter()
            .map(|spec| OrcaParams {
                time_horizon: self.config.human_orca.time_horizon,
                dt: self.config.dt,
                cooperation: spec.cooperation,
                v_max: spec.v_pref,
            })
            .collect();
        self.history = History::new(self.world.human_count(), self.config.k);
        self.history.push(&self.world);
        self.termination = Termination::Running;
        self.scenario = Some(scenario.clone());
        self.log = Some(EpisodeLog {
            header: LogHeader {
                schema: LOG_SCHEMA,
                seed,
                policy: self.policy_label.clone(),
                config: self.config,
                scenario: scenario.clone(),
            },
            steps: Vec::new(),
        });
        debug!(
            "reset: {} agents, scenario {:?}, seed {seed}",
            self.world.agents.len(),
            scenario.kind
        );
        Ok(self.observation())
    }

    fn clamp_action(&self, action: Action) -> Result<Action> {
        if !(action.v.is_finite() && action.dtheta.is_finite()) {
            return Err(Error::Usage(format!("non-finite action {action:?}")));
        }
        let v_max = self.world.robot().hidden.v_pref;
        let clamped = Action {
            v: action.v.clamp(0.0, v_max),
            dtheta: action
                .dtheta
                .clamp(-self.config.dtheta_max, self.config.dtheta_max),
        };
        if clamped != action {
            warn!("action {action:?} clamped to {clamped:?}");
        }
        Ok(clamped)
    }

    fn detect_termination(&self) -> Termination {
        let robot = self.world.robot();
        if robot.position().distance(robot.hidden.goal) < self.config.goal_tolerance {
            return Termination::Goal;
        }
        if self
            .world
            .humans()
            .any(|(_, h)| surface_distance(robot, h) <= 0.0)
        {
            return Termination::Collision;
        }
        if self.world.step >= self.config.max_steps() {
            return Termination::Timeout;
        }
        Termination::Running
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.scenario.is_none() {
            return Err(Error::Usage("step called before reset".to_string()));
        }
        if self.termination.is_terminal() {
            return Err(Error::Usage(format!(
                "step called after the episode ended ({:?})",
                self.termination
            )));
        }
        let action = self.clamp_action(action)?;
        let dt = self.config.dt;
        let prev = self.world.clone();

        let human_velocities: Vec<(usize, Vec2)> = prev
            .humans()
            .map(|(i, _)| {
                let v = human_policy_step(
                    &prev,
                    i,
                    &self.orca_params,
                    self.config.human_mode,
                    self.config.human_goal_tolerance,
                );
                (i, v)
            })
            .collect();

        {
            let robot = &mut self.world.agents[0];
            robot.heading = wrap_angle(robot.heading + action.dtheta);
            robot.observable.velocity = Vec2::from_angle(robot.heading) * action.v;
            robot.observable.position += robot.observable.velocity * dt;
        }
        for (i, v) in human_velocities {
            let human = &mut self.world.agents[i];
            human.observable.velocity = v;
            human.observable.position += v * dt;
            human.heading = AgentState::heading_from_velocity(v, human.heading);
        }
        self.world.step += 1;
        self.world.time = self.world.step as f64 * dt;

        let termination = self.detect_termination();
        let (reward, breakdown) =
            total_reward(&prev, &self.world, termination, &self.config.reward);
        self.termination = termination;

        self.history.push(&self.world);
        let observation = self.observation();

        let robot = self.world.robot();
        let info = StepInfo {
            human_rewards: self
                .world
                .humans()
                .map(|(_, h)| {
                    human_discomfort(h, robot, self.config.reward.r_v, self.config.reward.r_prox)
                })
                .collect(),
            violations: self
                .world
                .humans()
                .map(|(_, h)| proxemic_violation(robot, h))
                .collect(),
        };

        if let Some(log) = self.log.as_mut() {
            log.steps.push(StepRecord {
                step: self.world.step,
                time: self.world.time,
                action,
                agents: self.world.agents.iter().map(AgentSnapshot::of).collect(),
                reward,
                breakdown: breakdown.clone(),
                violations: info.violations.clone(),
                termination,
            });
        }

        Ok(StepResult {
            observation,
            reward,
            reward_breakdown: breakdown,
            termination,
            info,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AgentKind;
    use crate::scenario::{AgentSpec, ScenarioKind, ScenarioMetadata, SCENARIO_SCHEMA};
    use std::f64::consts::FRAC_PI_2;

    fn spec(kind: AgentKind, start: Vec2, goal: Vec2, r_prox: f64) -> AgentSpec {
        AgentSpec {
            kind,
            start,
            goal,
            radius: 0.3,
            v_pref: 1.0,
            r_prox,
            cooperation: 0.5,
            psi_pref: 0.0,
        }
    }

    fn scenario(agents: Vec<AgentSpec>) -> ScenarioConfig {
        ScenarioConfig {
            schema: SCENARIO_SCHEMA,
            kind: ScenarioKind::Custom,
            circle_radius: None,
            agents,
            metadata: ScenarioMetadata::default(),
        }
    }

    fn lone_robot() -> ScenarioConfig {
        scenario(vec![spec(
            AgentKind::Robot,
            Vec2::ZERO,
            Vec2::new(10.0, 0.0),
            0.0,
        )])
    }

    #[test]
    fn straight_translation() {
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        env.reset(&lone_robot(), 0).unwrap();
        env.step(Action::new(1.0, 0.0)).unwrap();
        let p = env.world().robot().position();
        assert!((p - Vec2::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn heading_updates_before_translation() {
        let config = EnvConfig {
            dtheta_max: FRAC_PI_2,
            ..EnvConfig::default()
        };
        let mut env = Environment::new(config).unwrap();
        env.reset(&lone_robot(), 0).unwrap();
        env.step(Action::new(1.0, FRAC_PI_2)).unwrap();
        let p = env.world().robot().position();
        assert!((p - Vec2::new(0.0, 0.2)).norm() < 1e-15);
        assert_eq!(env.world().robot().heading, FRAC_PI_2);
    }

    #[test]
    fn actions_are_clamped() {
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        env.reset(&lone_robot(), 0).unwrap();
        env.step(Action::new(5.0, 3.0)).unwrap();
        let rec = &env.log().unwrap().steps[0];
        assert_eq!(rec.action, Action::new(1.0, FRAC_PI_4));
        assert!(env.step(Action::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn reaching_goal_terminates_with_goal_reward() {
        let s = scenario(vec![spec(
            AgentKind::Robot,
            Vec2::ZERO,
            Vec2::new(0.4, 0.0),
            0.0,
        )]);
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        env.reset(&s, 0).unwrap();
        let r = env.step(Action::new(1.0, 0.0)).unwrap();
        assert_eq!(r.termination, Termination::Goal);
        assert_eq!(r.reward, 4.0);
        let err = env.step(Action::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn collision_terminates() {
        let s = scenario(vec![
            spec(AgentKind::Robot, Vec2::ZERO, Vec2::new(5.0, 0.0), 0.0),
            spec(
                AgentKind::Human,
                Vec2::new(0.7, 0.0),
                Vec2::new(0.7, 0.01),
                0.0,
            ),
        ]);
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        env.reset(&s, 0).unwrap();
        let r = env.step(Action::new(1.0, 0.0)).unwrap();
        assert_eq!(r.termination, Termination::Collision);
        assert_eq!(r.reward_breakdown.r_nav, -4.0);
    }

    #[test]
    fn timeout_bounds_episode_length() {
        let config = EnvConfig {
            timeout: 1.0,
            ..EnvConfig::default()
        };
        let mut env = Environment::new(config).unwrap();
        env.reset(&lone_robot(), 0).unwrap();
        let mut n = 0;
        loop {
            n += 1;
            let r = env.step(Action::new(0.0, 0.0)).unwrap();
            if r.termination.is_terminal() {
                assert_eq!(r.termination, Termination::Timeout);
                assert_eq!(r.reward_breakdown.r_nav, -4.0);
                break;
            }
        }
        assert_eq!(n, 5);
        assert!((env.world().time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_start_is_config_error() {
        let s = scenario(vec![
            spec(AgentKind::Robot, Vec2::ZERO, Vec2::new(5.0, 0.0), 0.0),
            spec(
                AgentKind::Human,
                Vec2::new(0.3, 0.0),
                Vec2::new(-5.0, 0.0),
                0.0,
            ),
        ]);
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        assert!(matches!(env.reset(&s, 0), Err(Error::Config(_))));
    }

    #[test]
    fn observation_layout_and_priming() {
        let s = scenario(vec![
            spec(AgentKind::Robot, Vec2::ZERO, Vec2::new(3.0, 4.0), 0.0),
            spec(
                AgentKind::Human,
                Vec2::new(3.0, 0.0),
                Vec2::new(-5.0, 0.0),
                0.5,
            ),
            spec(
                AgentKind::Human,
                Vec2::new(0.0, 3.0),
                Vec2::new(0.0, -5.0),
                0.5,
            ),
        ]);
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        let obs = env.reset(&s, 0).unwrap();
        assert_eq!(obs.robot_self[0], 5.0);
        assert_eq!(obs.robot_self[1..3], [3.0, 4.0]);
        assert_eq!(obs.robot_self[4], 1.0);
        assert_eq!(obs.robot_self[5], 0.3);
        assert_eq!(obs.humans.len(), 2);
        for h in &obs.humans {
            assert_eq!(h.frames.len(), 16);
            assert!(h.frames.iter().all(|f| *f == h.frames[0]));
            assert_eq!(h.static_part, [0.3, 0.6]);
            // both standing still
            assert_eq!(h.frames[0][3..], [0.0, 0.0]);
        }
        assert_eq!(obs.humans[0].frames[0][..3], [3.0, -3.0, 0.0]);
        assert_eq!(obs.flatten().len(), 6 + 2 * 82);
        assert_eq!(env.observation_len(), 6 + 2 * 82);

        env.step(Action::new(0.5, 0.0)).unwrap();
        let obs = env.observation();
        let h = &obs.humans[0];
        assert_ne!(h.frames[0], h.frames[1]);
        assert!(h.frames[1..].iter().all(|f| *f == h.frames[1]));
        for f in &h.frames {
            assert!((f[0] - f[1].hypot(f[2])).abs() < 1e-9);
        }
    }

    #[test]
    fn k_zero_keeps_only_current_frame() {
        let config = EnvConfig {
            k: 0,
            ..EnvConfig::default()
        };
        let s = scenario(vec![
            spec(AgentKind::Robot, Vec2::ZERO, Vec2::new(5.0, 0.0), 0.0),
            spec(
                AgentKind::Human,
                Vec2::new(0.0, 3.0),
                Vec2::new(0.0, -5.0),
                0.0,
            ),
        ]);
        let mut env = Environment::new(config).unwrap();
        env.reset(&s, 0).unwrap();
        for _ in 0..3 {
            env.step(Action::new(1.0, 0.0)).unwrap();
        }
        let obs = env.observation();
        assert_eq!(obs.humans[0].frames.len(), 1);
        assert_eq!(obs.flatten().len(), 6 + 7);
    }

    #[test]
    fn socially_aware_robot_carries_minimum_distance() {
        let mut config = EnvConfig::default();
        config.reward.mode = SocialMode::SociallyAware;
        let mut env = Environment::new(config).unwrap();
        env.reset(&lone_robot(), 0).unwrap();
        assert_eq!(env.world().robot().r_prox(), 0.2);
    }

    #[test]
    fn invalid_config_rejected() {
        let config = EnvConfig {
            dt: 0.0,
            ..EnvConfig::default()
        };
        let err = Environment::new(config).err().unwrap().to_string();
        assert!(err.contains("dt"), "{err}");
        assert!(EnvConfig::from_json(r#"{"reward": {"r_si": -1}}"#).is_err());
        let c = EnvConfig::from_json(r#"{"k": 3}"#).unwrap();
        assert_eq!(c.k, 3);
        assert_eq!(c.dt, 0.2);
    }

    #[test]
    fn step_before_reset_is_usage_error() {
        let mut env = Environment::new(EnvConfig::default()).unwrap();
        assert!(matches!(
            env.step(Action::new(0.0, 0.0)),
            Err(Error::Usage(_))
        ));
    }
}
