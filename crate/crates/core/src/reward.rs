//! Robot reward: a navigation term plus a social term aggregated from the
//! individual rewards of nearby humans.

use serde::{Deserialize, Serialize};

use crate::model::{proxemic_violation, surface_distance, AgentState, Termination, WorldState};

/// Lower bound on the center distance used by inverse-distance weighting.
pub const LAMBDA_MIN_DISTANCE: f64 = 0.1;

/// Which reward system the robot is trained under.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocialMode {
    /// Every nearby human rewards the robot from their own perspective.
    #[default]
    SociallyIntegrated,
    /// Fixed ego-side rules: a minimum distance to everyone and a preset speed.
    SociallyAware,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    #[default]
    Uniform,
    InverseDistance,
}

/// Where the velocity term lives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityTarget {
    /// In each human's reward: match the speed of the people around you.
    #[default]
    AdaptToHumans,
    /// In the navigation reward: keep the robot's own preferred speed.
    EgoPreferred,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub r_goal: f64,
    pub r_collision: f64,
    pub r_time: f64,
    /// Bonus per meter of progress toward the goal.
    pub r_gd1: f64,
    /// Penalty per meter moved away from the goal.
    pub r_gd2: f64,
    pub r_v: f64,
    pub r_prox: f64,
    /// Social integration radius around the robot center.
    pub r_si: f64,
    pub lambda_mode: LambdaMode,
    pub velocity_target: VelocityTarget,
    pub mode: SocialMode,
    /// Minimum surface distance enforced by the socially aware baseline.
    pub r0_prox: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            r_goal: 4.0,
            r_collision: 4.0,
            r_time: 4.0,
            r_gd1: 0.1,
            r_gd2: 0.2,
            r_v: 0.052,
            r_prox: 1.1,
            r_si: 2.0,
            lambda_mode: LambdaMode::Uniform,
            velocity_target: VelocityTarget::AdaptToHumans,
            mode: SocialMode::SociallyIntegrated,
            r0_prox: 0.2,
        }
    }
}

impl RewardConfig {
    /// The socially aware baseline always uses its own preferred speed.
    pub fn effective_velocity_target(&self) -> VelocityTarget {
        match self.mode {
            SocialMode::SociallyAware => VelocityTarget::EgoPreferred,
            SocialMode::SociallyIntegrated => self.velocity_target,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let constants = [
            ("r_goal", self.r_goal),
            ("r_collision", self.r_collision),
            ("r_time", self.r_time),
            ("r_gd1", self.r_gd1),
            ("r_gd2", self.r_gd2),
            ("r_v", self.r_v),
            ("r_prox", self.r_prox),
            ("r0_prox", self.r0_prox),
        ];
        for (name, value) in constants {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(format!(
                    "reward.{name} must be a finite value >= 0, got {value}"
                ));
            }
        }
        if !(self.r_si > 0.0 && self.r_si.is_finite()) {
            return Err(format!("reward.r_si must be > 0, got {}", self.r_si));
        }
        Ok(())
    }
}

/// Contribution of one human to the social term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanRewardEntry {
    pub index: usize,
    pub reward: f64,
    pub lambda: f64,
    pub in_radius: bool,
    pub violated: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_nav: f64,
    pub r_sa: f64,
    pub per_human: Vec<HumanRewardEntry>,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.r_nav + self.r_sa
    }
}

fn goal_distance(agent: &AgentState) -> f64 {
    agent.hidden.goal.distance(agent.position())
}

pub fn navigation_reward(
    prev_world: &WorldState,
    world: &WorldState,
    termination: Termination,
    config: &RewardConfig,
) -> f64 {
    match termination {
        Termination::Goal => config.r_goal,
        Termination::Collision => -config.r_collision,
        Termination::Timeout => -config.r_time,
        Termination::Running => {
            let robot = world.robot();
            // Positive when the robot got closer.
            let progress = goal_distance(prev_world.robot()) - goal_distance(robot);
            let mut r = if progress > 0.0 {
                config.r_gd1 * progress.abs()
            } else if progress < 0.0 {
                -config.r_gd2 * progress.abs()
            } else {
                0.0
            };
            if config.effective_velocity_target() == VelocityTarget::EgoPreferred {
                r -= config.r_v * (robot.velocity().norm() - robot.hidden.v_pref).abs();
            }
            r
        }
    }
}

/// Discomfort one human expresses toward the robot: a speed-mismatch term
/// weighted by `r_v` and a flat penalty when the robot is inside their
/// personal space.
pub fn human_discomfort(human: &AgentState, robot: &AgentState, r_v: f64, r_prox: f64) -> f64 {
    let speed_gap = (human.velocity().norm() - robot.velocity().norm()).abs();
    let penalty = if proxemic_violation(robot, human) {
        r_prox
    } else {
        0.0
    };
    -r_v * speed_gap - penalty
}

/// The reward a single human gives the robot. The speed term is dropped when
/// the velocity reward is attached to the navigation term instead.
pub fn human_reward(human: &AgentState, robot: &AgentState, config: &RewardConfig) -> f64 {
    let r_v = match config.effective_velocity_target() {
        VelocityTarget::AdaptToHumans => config.r_v,
        VelocityTarget::EgoPreferred => 0.0,
    };
    human_discomfort(human, robot, r_v, config.r_prox)
}

/// Weighted mean of the rewards of humans within `r_si` of the robot center.
pub fn socially_adaptive_reward(
    world: &WorldState,
    config: &RewardConfig,
) -> (f64, Vec<HumanRewardEntry>) {
    let robot = world.robot();
    let mut entries: Vec<HumanRewardEntry> = Vec::with_capacity(world.agents.len());
    let mut center_distances = Vec::with_capacity(world.agents.len());
    for (index, human) in world.humans() {
        let center = human.position().distance(robot.position());
        let in_radius = center < config.r_si;
        entries.push(HumanRewardEntry {
            index,
            reward: if in_radius {
                human_reward(human, robot, config)
            } else {
                0.0
            },
            lambda: 0.0,
            in_radius,
            violated: proxemic_violation(robot, human),
        });
        center_distances.push(center);
    }

    let m = entries.iter().filter(|e| e.in_radius).count();
    if m == 0 {
        return (0.0, entries);
    }

    match config.lambda_mode {
        LambdaMode::Uniform => {
            for e in entries.iter_mut().filter(|e| e.in_radius) {
                e.lambda = 1.0;
            }
        }
        LambdaMode::InverseDistance => {
            let mut raw_sum = 0.0;
            for (e, d) in entries.iter_mut().zip(&center_distances) {
                if e.in_radius {
                    e.lambda = config.r_si / d.max(LAMBDA_MIN_DISTANCE);
                    raw_sum += e.lambda;
                }
            }
            let scale = m as f64 / raw_sum;
            for e in entries.iter_mut().filter(|e| e.in_radius) {
                e.lambda *= scale;
            }
        }
    }

    let sum: f64 = entries
        .iter()
        .filter(|e| e.in_radius)
        .map(|e| e.lambda * e.reward)
        .sum();
    (sum / m as f64, entries)
}

/// Ego-side social term of the socially aware baseline: a flat penalty for
/// every human closer than `r0_prox`, ungated.
fn ego_distance_reward(world: &WorldState, config: &RewardConfig) -> (f64, Vec<HumanRewardEntry>) {
    let robot = world.robot();
    let entries: Vec<HumanRewardEntry> = world
        .humans()
        .map(|(index, human)| {
            let violated = surface_distance(robot, human) < config.r0_prox;
            HumanRewardEntry {
                index,
                reward: if violated { -config.r_prox } else { 0.0 },
                lambda: 1.0,
                in_radius: true,
                violated,
            }
        })
        .collect();
    let sum = entries.iter().map(|e| e.reward).sum();
    (sum, entries)
}

pub fn total_reward(
    prev_world: &WorldState,
    world: &WorldState,
    termination: Termination,
    config: &RewardConfig,
) -> (f64, RewardBreakdown) {
    let r_nav = navigation_reward(prev_world, world, termination, config);
    let (r_sa, per_human) = match config.mode {
        SocialMode::SociallyIntegrated => socially_adaptive_reward(world, config),
        SocialMode::SociallyAware => ego_distance_reward(world, config),
    };
    let breakdown = RewardBreakdown {
        r_nav,
        r_sa,
        per_human,
    };
    (breakdown.total(), breakdown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::model::fixtures::agent;
    use crate::model::AgentKind::*;
    use proptest::prelude::*;

    fn world(agents: Vec<AgentState>) -> WorldState {
        WorldState {
            agents,
            time: 0.0,
            step: 0,
        }
    }

    fn robot_at(x: f64, goal_x: f64) -> AgentState {
        let mut r = agent(Robot, x, 0.0, 0.0);
        r.hidden.goal = Vec2::new(goal_x, 0.0);
        r
    }

    #[test]
    fn terminal_rewards_are_the_constants() {
        let cfg = RewardConfig::default();
        let w = world(vec![robot_at(0.0, 5.0)]);
        assert_eq!(navigation_reward(&w, &w, Termination::Goal, &cfg), 4.0);
        assert_eq!(
            navigation_reward(&w, &w, Termination::Collision, &cfg),
            -4.0
        );
        assert_eq!(navigation_reward(&w, &w, Termination::Timeout, &cfg), -4.0);
    }

    #[test]
    fn progress_shaping() {
        let cfg = RewardConfig::default();
        let before = world(vec![robot_at(0.0, 5.0)]);
        let toward = world(vec![robot_at(0.25, 5.0)]);
        let away = world(vec![robot_at(-0.25, 5.0)]);
        let r = navigation_reward(&before, &toward, Termination::Running, &cfg);
        assert!((r - 0.025).abs() < 1e-12);
        let r = navigation_reward(&before, &away, Termination::Running, &cfg);
        assert!((r + 0.05).abs() < 1e-12);
        assert_eq!(
            navigation_reward(&before, &before, Termination::Running, &cfg),
            0.0
        );
    }

    #[test]
    fn progress_of_a_fifth_meter() {
        let cfg = RewardConfig::default();
        let before = world(vec![robot_at(0.0, 5.0)]);
        let toward = world(vec![robot_at(0.2, 5.0)]);
        let away = world(vec![robot_at(-0.2, 5.0)]);
        let r = navigation_reward(&before, &toward, Termination::Running, &cfg);
        assert!((r - 0.02).abs() < 1e-12);
        let r = navigation_reward(&before, &away, Termination::Running, &cfg);
        assert!((r + 0.04).abs() < 1e-12);
    }

    #[test]
    fn ego_velocity_term() {
        let cfg = RewardConfig {
            velocity_target: VelocityTarget::EgoPreferred,
            ..RewardConfig::default()
        };
        let before = world(vec![robot_at(0.0, 5.0)]);
        let mut r = robot_at(0.0, 5.0);
        r.observable.velocity = Vec2::new(0.5, 0.0);
        let after = world(vec![r]);
        let reward = navigation_reward(&before, &after, Termination::Running, &cfg);
        assert!((reward + 0.052 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn human_reward_examples() {
        let cfg = RewardConfig::default();
        let robot = agent(Robot, 0.0, 0.0, 0.0);
        let far = agent(Human, 1.5, 0.0, 0.0);
        assert_eq!(human_reward(&far, &robot, &cfg), 0.0);

        let mut moving = far;
        moving.observable.velocity = Vec2::new(0.0, 0.5);
        assert!((human_reward(&moving, &robot, &cfg) + 0.026).abs() < 1e-12);

        // Surface distance 0.9 inside r_prox 1.0.
        let close = agent(Human, 1.5, 0.0, 1.0);
        assert!((human_reward(&close, &robot, &cfg) + 1.1).abs() < 1e-12);
    }

    #[test]
    fn empty_neighborhood_is_zero() {
        let cfg = RewardConfig::default();
        let w = world(vec![robot_at(0.0, 5.0), agent(Human, 10.0, 0.0, 0.8)]);
        let (r, entries) = socially_adaptive_reward(&w, &cfg);
        assert_eq!(r, 0.0);
        assert_eq!(entries.len(), 1);
        assert!(!entries[0].in_radius);
    }

    #[test]
    fn single_human_uniform_equals_human_reward() {
        let cfg = RewardConfig::default();
        let mut h = agent(Human, 1.0, 0.0, 0.5);
        h.observable.velocity = Vec2::new(0.7, 0.0);
        let w = world(vec![robot_at(0.0, 5.0), h]);
        let (r, _) = socially_adaptive_reward(&w, &cfg);
        assert_eq!(r, human_reward(&h, w.robot(), &cfg));
    }

    #[test]
    fn two_humans_are_averaged() {
        let cfg = RewardConfig::default();
        let mut a = agent(Human, 0.0, 1.5, 0.0);
        a.observable.velocity = Vec2::new(0.5, 0.0);
        let b = agent(Human, 1.5, 0.0, 1.0);
        let w = world(vec![robot_at(0.0, 5.0), a, b]);
        let (r, entries) = socially_adaptive_reward(&w, &cfg);
        assert!((entries[0].reward + 0.026).abs() < 1e-12);
        assert!((entries[1].reward + 1.1).abs() < 1e-12);
        assert!((r + 0.563).abs() < 1e-12);
    }

    #[test]
    fn inverse_distance_weights_have_unit_mean() {
        let cfg = RewardConfig {
            lambda_mode: LambdaMode::InverseDistance,
            ..RewardConfig::default()
        };
        let w = world(vec![
            robot_at(0.0, 5.0),
            agent(Human, 0.5, 0.0, 0.8),
            agent(Human, 0.0, 1.5, 0.0),
            agent(Human, 0.0, 0.05, 0.0),
        ]);
        let (_, entries) = socially_adaptive_reward(&w, &cfg);
        let lambdas: Vec<f64> = entries.iter().map(|e| e.lambda).collect();
        assert!(((lambdas.iter().sum::<f64>() / 3.0) - 1.0).abs() < 1e-12);
        // closer humans weigh more; the 0.05 m one is capped at 0.1 m
        assert!(lambdas[2] > lambdas[0] && lambdas[0] > lambdas[1]);
        assert!((lambdas[0] / lambdas[1] - 3.0).abs() < 1e-12);
        assert!((lambdas[2] / lambdas[1] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn goal_with_empty_neighborhood_is_exactly_r_goal() {
        let cfg = RewardConfig::default();
        let w = world(vec![robot_at(0.0, 5.0), agent(Human, 9.0, 0.0, 0.8)]);
        let (total, b) = total_reward(&w, &w, Termination::Goal, &cfg);
        assert_eq!(total, 4.0);
        assert_eq!(b.r_sa, 0.0);
    }

    #[test]
    fn socially_aware_penalizes_minimum_distance() {
        let cfg = RewardConfig {
            mode: SocialMode::SociallyAware,
            ..RewardConfig::default()
        };
        // Surface distance 0.1 to a human without personal space.
        let w = world(vec![robot_at(0.0, 5.0), agent(Human, 0.0, 0.7, 0.0)]);
        let (_, b) = total_reward(&w, &w, Termination::Running, &cfg);
        assert!((b.r_sa + 1.1).abs() < 1e-12);
        assert!(b.per_human[0].violated);
    }

    #[test]
    fn idle_step_is_zero() {
        let cfg = RewardConfig::default();
        let w = world(vec![robot_at(0.0, 5.0), agent(Human, 9.0, 0.0, 0.8)]);
        let (total, _) = total_reward(&w, &w, Termination::Running, &cfg);
        assert_eq!(total, 0.0);
    }

    fn arb_world() -> impl Strategy<Value = WorldState> {
        let human = (
            -3.0..3.0f64,
            -3.0..3.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            0.0..0.8f64,
        )
            .prop_map(|(x, y, vx, vy, rp)| {
                let mut h = agent(Human, x, y, rp);
                h.observable.velocity = Vec2::new(vx, vy);
                h
            });
        (proptest::collection::vec(human, 0..8), -1.0..1.0f64).prop_map(|(hs, rv)| {
            let mut r = robot_at(0.0, 5.0);
            r.observable.velocity = Vec2::new(rv, 0.0);
            let mut agents = vec![r];
            agents.extend(hs);
            world(agents)
        })
    }

    proptest! {
        #[test]
        fn social_term_is_non_positive(w in arb_world(), inverse in any::<bool>()) {
            let cfg = RewardConfig {
                lambda_mode: if inverse { LambdaMode::InverseDistance } else { LambdaMode::Uniform },
                ..RewardConfig::default()
            };
            let (r, _) = socially_adaptive_reward(&w, &cfg);
            prop_assert!(r <= 0.0);
        }

        #[test]
        fn enlarging_r_si_keeps_members(w in arb_world(), r_si in 0.1..3.0f64, extra in 0.0..2.0f64) {
            let small = RewardConfig { r_si, ..RewardConfig::default() };
            let large = RewardConfig { r_si: r_si + extra, ..RewardConfig::default() };
            let (_, a) = socially_adaptive_reward(&w, &small);
            let (_, b) = socially_adaptive_reward(&w, &large);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(!x.in_radius || y.in_radius);
            }
        }

        #[test]
        fn uniform_is_exact_mean(w in arb_world()) {
            let cfg = RewardConfig::default();
            let (r, entries) = socially_adaptive_reward(&w, &cfg);
            let members: Vec<f64> = entries.iter().filter(|e| e.in_radius).map(|e| e.reward).collect();
            if members.is_empty() {
                prop_assert_eq!(r, 0.0);
            } else {
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                prop_assert_eq!(r, mean);
            }
        }
    }
}
