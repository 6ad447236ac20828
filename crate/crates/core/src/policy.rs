//! Scripted robot policies used as baselines and for exercising the
//! environment without a learned controller.

use serde::{Deserialize, Serialize};

use crate::env::{Action, EnvConfig, Environment};
use crate::error::Result;
use crate::geometry::{wrap_angle, Vec2};
use crate::log::EpisodeLog;
use crate::lp::solve_velocity;
use crate::model::WorldState;
use crate::orca::{orca_line, preferred_velocity, OrcaParams};
use crate::scenario::{ScenarioConfig, ROBOT_COOPERATION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedPolicy {
    StraightLine,
    OrcaRobot,
}

impl ScriptedPolicy {
    pub fn label(self) -> &'static str {
        match self {
            ScriptedPolicy::StraightLine => "straight_line",
            ScriptedPolicy::OrcaRobot => "orca",
        }
    }

    pub fn act(self, world: &WorldState, config: &EnvConfig) -> Action {
        match self {
            ScriptedPolicy::StraightLine => straight_line(world, config),
            ScriptedPolicy::OrcaRobot => orca_robot(world, config),
        }
    }
}

/// Turns toward `desired` velocity as far as `dtheta_max` allows and drives
/// at its magnitude.
fn steer(world: &WorldState, config: &EnvConfig, desired: Vec2) -> Action {
    let robot = world.robot();
    let speed = desired.norm();
    if speed == 0.0 {
        return Action::new(0.0, 0.0);
    }
    let turn = wrap_angle(desired.angle() - robot.heading);
    Action::new(speed, turn.clamp(-config.dtheta_max, config.dtheta_max))
}

/// Heads straight for the goal at the preferred speed.
pub fn straight_line(world: &WorldState, config: &EnvConfig) -> Action {
    let robot = world.robot();
    let desired = preferred_velocity(robot, 0.0);
    steer(world, config, desired)
}

/// Plain reciprocal avoidance for the robot, mapped onto the unicycle.
pub fn orca_robot(world: &WorldState, config: &EnvConfig) -> Action {
    let robot = world.robot();
    let params = OrcaParams {
        time_horizon: config.human_orca.time_horizon,
        dt: config.dt,
        cooperation: ROBOT_COOPERATION,
        v_max: robot.hidden.v_pref,
    };
    let lines: Vec<_> = world
        .humans()
        .map(|(_, h)| orca_line(robot, h, robot.radius() + h.radius(), &params))
        .collect();
    let preferred = preferred_velocity(robot, 0.0);
    let v = solve_velocity(&lines, preferred, params.v_max);
    steer(world, config, v)
}

/// Runs one full episode under a scripted policy.
pub fn run_episode(
    config: &EnvConfig,
    scenario: &ScenarioConfig,
    seed: u64,
    policy: ScriptedPolicy,
) -> Result<EpisodeLog> {
    let mut env = Environment::new(*config)?;
    env.set_policy_label(policy.label());
    env.reset(scenario, seed)?;
    loop {
        let action = policy.act(env.world(), env.config());
        if env.step(action)?.termination.is_terminal() {
            break;
        }
    }
    Ok(env.take_log().expect("log exists after reset"))
}

/// Runs one episode replaying `actions`; once the list runs out the last
/// action (or standing still) is repeated until the episode ends.
pub fn replay_actions(
    config: &EnvConfig,
    scenario: &ScenarioConfig,
    seed: u64,
    actions: &[Action],
) -> Result<EpisodeLog> {
    let mut env = Environment::new(*config)?;
    env.set_policy_label("replay");
    env.reset(scenario, seed)?;
    let mut i = 0;
    loop {
        let action = actions
            .get(i)
            .or(actions.last())
            .copied()
            .unwrap_or_default();
        i += 1;
        if env.step(action)?.termination.is_terminal() {
            break;
        }
    }
    Ok(env.take_log().expect("log exists after reset"))
}
