//! Seeded scenario generators and the versioned scenario file format.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::model::AgentKind;

pub const SCENARIO_SCHEMA: u32 = 1;

pub const AGENT_RADIUS: f64 = 0.3;
pub const ROBOT_V_PREF: f64 = 1.0;
pub const ROBOT_COOPERATION: f64 = 0.5;
pub const R_PROX_RANGE: [f64; 2] = [0.0, 0.8];
pub const V_PREF_RANGE: [f64; 2] = [0.5, 1.0];
pub const COOPERATION_RANGE: [f64; 2] = [0.3, 0.7];

/// Minimum surface distance between sampled starts (and between goals).
pub const MIN_SEPARATION: f64 = 0.1;
pub const MAX_ATTEMPTS: usize = 1000;
pub const GOAL_JITTER: f64 = 10.0 * PI / 180.0;
/// Lateral spread of oncoming humans in the passing scenario.
pub const PASSING_LATERAL_JITTER: f64 = 0.25;
/// How far beyond the robot's start oncoming humans keep walking.
pub const PASSING_GOAL_OVERSHOOT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Circle crossing, one personal-space radius shared by all humans.
    CircleCrossingHo,
    /// Circle crossing, personal-space radius sampled per human.
    CircleCrossingHe,
    Passing,
    /// Hand-written scenario.
    Custom,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::CircleCrossingHo => "circle_crossing_ho",
            ScenarioKind::CircleCrossingHe => "circle_crossing_he",
            ScenarioKind::Passing => "passing",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heterogeneity {
    Homogeneous,
    Heterogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub kind: AgentKind,
    pub start: Vec2,
    pub goal: Vec2,
    pub radius: f64,
    pub v_pref: f64,
    pub r_prox: f64,
    pub cooperation: f64,
    #[serde(default)]
    pub psi_pref: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRanges {
    pub r_prox: [f64; 2],
    pub v_pref: [f64; 2],
    pub cooperation: [f64; 2],
}

impl Default for SamplingRanges {
    fn default() -> Self {
        SamplingRanges {
            r_prox: R_PROX_RANGE,
            v_pref: V_PREF_RANGE,
            cooperation: COOPERATION_RANGE,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<SamplingRanges>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle_radius: Option<f64>,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub metadata: ScenarioMetadata,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: ScenarioConfig = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn humans(&self) -> impl Iterator<Item = &AgentSpec> {
        self.agents.iter().filter(|a| a.kind == AgentKind::Human)
    }

    /// Checks ranges and placement. Starts may touch but not overlap.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(Error::Config(format!(
                "scenario.schema: expected {SCENARIO_SCHEMA}, got {}",
                self.schema
            )));
        }
        match self.agents.first() {
            Some(a) if a.kind == AgentKind::Robot => {}
            _ => {
                return Err(Error::Config(
                    "scenario.agents[0] must be the robot".to_string(),
                ))
            }
        }
        for (i, a) in self.agents.iter().enumerate() {
            let field = |name: &str| format!("scenario.agents[{i}].{name}");
            if i > 0 && a.kind == AgentKind::Robot {
                return Err(Error::Config(format!(
                    "{}: only agent 0 may be the robot",
                    field("kind")
                )));
            }
            if !(a.start.is_finite() && a.goal.is_finite()) {
                return Err(Error::Config(format!(
                    "{}: not finite",
                    field("start/goal")
                )));
            }
            if !(a.radius > 0.0 && a.radius.is_finite()) {
                return Err(Error::Config(format!("{} must be > 0", field("radius"))));
            }
            if !(a.v_pref > 0.0 && a.v_pref.is_finite()) {
                return Err(Error::Config(format!("{} must be > 0", field("v_pref"))));
            }
            if !(a.r_prox >= 0.0 && a.r_prox.is_finite()) {
                return Err(Error::Config(format!("{} must be >= 0", field("r_prox"))));
            }
            if !(a.cooperation > 0.0 && a.cooperation <= 1.0) {
                return Err(Error::Config(format!(
                    "{} must be in (0, 1]",
                    field("cooperation")
                )));
            }
            if a.start == a.goal {
                return Err(Error::Config(format!(
                    "{}: start coincides with goal",
                    field("goal")
                )));
            }
        }
        for i in 0..self.agents.len() {
            for j in (i + 1)..self.agents.len() {
                let (a, b) = (&self.agents[i], &self.agents[j]);
                if a.start.distance(b.start) - a.radius - b.radius < 0.0 {
                    return Err(Error::Config(format!(
                        "scenario.agents[{i}] and scenario.agents[{j}] overlap at their start positions"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn robot_spec(start: Vec2, goal: Vec2) -> AgentSpec {
    AgentSpec {
        kind: AgentKind::Robot,
        start,
        goal,
        radius: AGENT_RADIUS,
        v_pref: ROBOT_V_PREF,
        r_prox: 0.0,
        cooperation: ROBOT_COOPERATION,
        psi_pref: (goal - start).angle(),
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    rng.gen_range(range[0]..=range[1])
}

fn separated(points: &[Vec2], candidate: Vec2) -> bool {
    points
        .iter()
        .all(|p| p.distance(candidate) - 2.0 * AGENT_RADIUS > MIN_SEPARATION)
}

/// Circle crossing: every agent starts on the circle and heads for the
/// roughly antipodal point. Agent 0 is the robot.
pub fn sample_circle_crossing<R: Rng + ?Sized>(
    n_agents: usize,
    heterogeneity: Heterogeneity,
    circle_radius: f64,
    rng: &mut R,
) -> Result<ScenarioConfig> {
    if n_agents < 2 {
        return Err(Error::Config(format!(
            "n_agents must be >= 2, got {n_agents}"
        )));
    }
    if !(circle_radius > 0.0 && circle_radius.is_finite()) {
        return Err(Error::Config(format!(
            "circle_radius must be > 0, got {circle_radius}"
        )));
    }

    let mut starts: Vec<Vec2> = Vec::with_capacity(n_agents);
    let mut goals: Vec<Vec2> = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let mut failed = "start separation";
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let angle = rng.gen_range(0.0..TAU);
            let jitter = rng.gen_range(-GOAL_JITTER..=GOAL_JITTER);
            let start = Vec2::from_angle(angle) * circle_radius;
            let goal = Vec2::from_angle(angle + PI + jitter) * circle_radius;
            if !separated(&starts, start) {
                failed = "start separation";
                continue;
            }
            if !separated(&goals, goal) {
                failed = "goal separation";
                continue;
            }
            starts.push(start);
            goals.push(goal);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::Generation {
                constraint: failed,
                attempts: MAX_ATTEMPTS,
            });
        }
    }

    let shared_r_prox = uniform(rng, R_PROX_RANGE);
    let mut agents = Vec::with_capacity(n_agents);
    agents.push(robot_spec(starts[0], goals[0]));
    for i in 1..n_agents {
        let r_prox = match heterogeneity {
            Heterogeneity::Homogeneous => shared_r_prox,
            Heterogeneity::Heterogeneous => uniform(rng, R_PROX_RANGE),
        };
        let v_pref = uniform(rng, V_PREF_RANGE);
        let cooperation = uniform(rng, COOPERATION_RANGE);
        agents.push(AgentSpec {
            kind: AgentKind::Human,
            start: starts[i],
            goal: goals[i],
            radius: AGENT_RADIUS,
            v_pref,
            r_prox,
            cooperation,
            psi_pref: (goals[i] - starts[i]).angle(),
        });
    }

    Ok(ScenarioConfig {
        schema: SCENARIO_SCHEMA,
        kind: match heterogeneity {
            Heterogeneity::Homogeneous => ScenarioKind::CircleCrossingHo,
            Heterogeneity::Heterogeneous => ScenarioKind::CircleCrossingHe,
        },
        circle_radius: Some(circle_radius),
        agents,
        metadata: ScenarioMetadata {
            seed: None,
            ranges: Some(SamplingRanges::default()),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PassingParams {
    pub n_oncoming: usize,
    pub corridor_length: f64,
    /// Longitudinal spacing between consecutive oncoming humans.
    pub lateral_gap: f64,
    pub r_prox_oncoming: f64,
}

impl Default for PassingParams {
    fn default() -> Self {
        PassingParams {
            n_oncoming: 2,
            corridor_length: 8.0,
            lateral_gap: 1.5,
            r_prox_oncoming: 0.8,
        }
    }
}

/// Robot walks up an open corridor along +y while humans come down it.
pub fn sample_passing<R: Rng + ?Sized>(
    params: &PassingParams,
    rng: &mut R,
) -> Result<ScenarioConfig> {
    if params.n_oncoming < 1 {
        return Err(Error::Config("passing.n_oncoming must be >= 1".to_string()));
    }
    if params.corridor_length.is_nan() || params.corridor_length <= 0.0 {
        return Err(Error::Config(
            "passing.corridor_length must be > 0".to_string(),
        ));
    }
    if params.r_prox_oncoming.is_nan() || params.r_prox_oncoming < 0.0 {
        return Err(Error::Config(
            "passing.r_prox_oncoming must be >= 0".to_string(),
        ));
    }
    let half = params.corridor_length / 2.0;
    let mut agents = vec![robot_spec(Vec2::new(0.0, -half), Vec2::new(0.0, half))];
    for j in 0..params.n_oncoming {
        let x = rng.gen_range(-PASSING_LATERAL_JITTER..=PASSING_LATERAL_JITTER);
        let start = Vec2::new(x, half - j as f64 * params.lateral_gap);
        let goal = Vec2::new(x, -half - PASSING_GOAL_OVERSHOOT);
        agents.push(AgentSpec {
            kind: AgentKind::Human,
            start,
            goal,
            radius: AGENT_RADIUS,
            v_pref: uniform(rng, V_PREF_RANGE),
            r_prox: params.r_prox_oncoming,
            cooperation: uniform(rng, COOPERATION_RANGE),
            psi_pref: (goal - start).angle(),
        });
    }
    let scenario = ScenarioConfig {
        schema: SCENARIO_SCHEMA,
        kind: ScenarioKind::Passing,
        circle_radius: None,
        agents,
        metadata: ScenarioMetadata {
            seed: None,
            ranges: Some(SamplingRanges {
                r_prox: [params.r_prox_oncoming, params.r_prox_oncoming],
                ..SamplingRanges::default()
            }),
        },
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Recipe for a scenario: either fixed or drawn from a generator per seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ScenarioGenerator {
    CircleCrossing {
        #[serde(default = "default_n_agents")]
        n_agents: usize,
        heterogeneity: Heterogeneity,
        #[serde(default = "default_circle_radius")]
        circle_radius: f64,
    },
    Passing(PassingParams),
}

pub fn default_n_agents() -> usize {
    8
}

pub fn default_circle_radius() -> f64 {
    4.0
}

/// Deterministic generator for scenario seeds.
pub fn scenario_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

impl ScenarioGenerator {
    pub fn circle_crossing(heterogeneity: Heterogeneity) -> Self {
        ScenarioGenerator::CircleCrossing {
            n_agents: default_n_agents(),
            heterogeneity,
            circle_radius: default_circle_radius(),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<ScenarioConfig> {
        let mut rng = scenario_rng(seed);
        let mut scenario = match *self {
            ScenarioGenerator::CircleCrossing {
                n_agents,
                heterogeneity,
                circle_radius,
            } => sample_circle_crossing(n_agents, heterogeneity, circle_radius, &mut rng)?,
            ScenarioGenerator::Passing(params) => sample_passing(&params, &mut rng)?,
        };
        scenario.metadata.seed = Some(seed);
        Ok(scenario)
    }
}

/// What the CLI and the foreign-function boundary accept as a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Fixed(ScenarioConfig),
    Generated(ScenarioGenerator),
}

impl ScenarioSource {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let source = if value.get("generator").is_some() {
            ScenarioSource::Generated(serde_json::from_value(value)?)
        } else {
            ScenarioSource::Fixed(serde_json::from_value(value)?)
        };
        if let ScenarioSource::Fixed(s) = &source {
            s.validate()?;
        }
        Ok(source)
    }

    pub fn resolve(&self, seed: u64) -> Result<ScenarioConfig> {
        match self {
            ScenarioSource::Fixed(s) => Ok(s.clone()),
            ScenarioSource::Generated(g) => g.generate(seed),
        }
    }
}
