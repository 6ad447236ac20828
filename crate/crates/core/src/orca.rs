//! Reciprocal collision avoidance for the simulated humans.
//!
//! Each agent builds one half-plane per neighbor from the truncated velocity
//! obstacle of the pair and picks the admissible velocity closest to its
//! preferred velocity. In socially integrated mode the pairwise radius is
//! inflated by personal space, so humans keep other people out of their own
//! proxemic zone and stay out of theirs.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::lp::{solve_velocity_prioritized, HalfPlane, LpSolution};
use crate::model::{AgentKind, AgentState, WorldState};

/// Extra clearance on the one-step constraints that stay exact when the full
/// set of constraints is infeasible.
pub const ONE_STEP_CLEARANCE: f64 = 0.1;

/// How an agent inflates the pairwise radius it avoids.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrcaMode {
    /// Personal space is respected: toward the robot the ego's own, toward
    /// other humans the larger of the two.
    #[default]
    SociallyIntegrated,
    /// Bodies only.
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrcaParams {
    pub time_horizon: f64,
    pub dt: f64,
    /// Fraction of the pairwise correction the ego takes on (0.5 is the
    /// symmetric split).
    pub cooperation: f64,
    pub v_max: f64,
}

impl Default for OrcaParams {
    fn default() -> Self {
        OrcaParams {
            time_horizon: 5.0,
            dt: 0.2,
            cooperation: 0.5,
            v_max: 1.0,
        }
    }
}

impl OrcaParams {
    pub fn is_valid(&self) -> bool {
        self.time_horizon > 0.0
            && self.dt > 0.0
            && self.cooperation > 0.0
            && self.cooperation <= 1.0
            && self.v_max > 0.0
    }
}

/// Radius of the disc `ego` keeps `other`'s center out of.
pub fn effective_combined_radius(ego: &AgentState, other: &AgentState, mode: OrcaMode) -> f64 {
    let bodies = ego.radius() + other.radius();
    match mode {
        OrcaMode::Plain => bodies,
        OrcaMode::SociallyIntegrated => {
            debug_assert_eq!(ego.kind, AgentKind::Human);
            match other.kind {
                AgentKind::Robot => bodies + ego.r_prox(),
                AgentKind::Human => bodies + ego.r_prox().max(other.r_prox()),
            }
        }
    }
}

/// One half-plane for a single neighbor.
pub fn orca_line(
    ego: &AgentState,
    other: &AgentState,
    combined_radius: f64,
    params: &OrcaParams,
) -> HalfPlane {
    let relative_position = other.position() - ego.position();
    let relative_velocity = ego.velocity() - other.velocity();
    let dist_sq = relative_position.norm_squared();
    let r = combined_radius;
    let r_sq = r * r;

    let (direction, u) = if dist_sq > r_sq {
        let inv_tau = 1.0 / params.time_horizon;
        // From the cutoff center to the relative velocity.
        let w = relative_velocity - inv_tau * relative_position;
        let w_len_sq = w.norm_squared();
        let dot1 = w.dot(relative_position);

        if dot1 < 0.0 && dot1 * dot1 > r_sq * w_len_sq {
            // Closest boundary point is on the cutoff circle.
            let w_len = w_len_sq.sqrt();
            let unit_w = w / w_len;
            (
                Vec2::new(unit_w.y, -unit_w.x),
                (r * inv_tau - w_len) * unit_w,
            )
        } else {
            // Closest boundary point is on one of the legs.
            let leg = (dist_sq - r_sq).sqrt();
            let p = relative_position;
            let direction = if p.det(w) > 0.0 {
                Vec2::new(p.x * leg - p.y * r, p.x * r + p.y * leg) / dist_sq
            } else {
                -Vec2::new(p.x * leg + p.y * r, -p.x * r + p.y * leg) / dist_sq
            };
            let u = relative_velocity.dot(direction) * direction - relative_velocity;
            (direction, u)
        }
    } else {
        // Already inside the combined radius: resolve within one step.
        let inv_dt = 1.0 / params.dt;
        let w = relative_velocity - inv_dt * relative_position;
        let w_len = w.norm();
        let unit_w = if w_len > 0.0 { w / w_len } else { Vec2::X };
        (
            Vec2::new(unit_w.y, -unit_w.x),
            (r * inv_dt - w_len) * unit_w,
        )
    };

    HalfPlane {
        point: ego.velocity() + params.cooperation * u,
        direction,
    }
}

/// One half-plane per neighbor, in neighbor order.
pub fn compute_orca_lines(
    ego: &AgentState,
    neighbors: &[(AgentState, f64)],
    params: &OrcaParams,
) -> Vec<HalfPlane> {
    neighbors
        .iter()
        .map(|(other, radius)| orca_line(ego, other, *radius, params))
        .collect()
}

/// Goal-directed velocity at `v_pref`, zero within `goal_tolerance`.
pub fn preferred_velocity(agent: &AgentState, goal_tolerance: f64) -> Vec2 {
    let to_goal = agent.hidden.goal - agent.position();
    let dist = to_goal.norm();
    if dist < goal_tolerance || dist == 0.0 {
        Vec2::ZERO
    } else {
        to_goal * (agent.hidden.v_pref / dist)
    }
}

/// Share of a pairwise correction taken by an agent with cooperation
/// `ego` facing one with cooperation `other`. The two shares sum to one.
pub fn pairwise_share(ego: f64, other: f64) -> f64 {
    ego / (ego + other)
}

/// ORCA solve for a single agent against every other agent in `world`;
/// `params` holds one entry per agent in world order.
///
/// Each neighbor contributes a constraint over the time horizon and one over
/// a single step, inflated by [`ONE_STEP_CLEARANCE`]. The one-step set is
/// only binding when the horizon constraints cannot all be met.
pub fn agent_policy_step(
    world: &WorldState,
    agent_index: usize,
    params: &[OrcaParams],
    mode: OrcaMode,
    goal_tolerance: f64,
) -> LpSolution {
    debug_assert_eq!(params.len(), world.agents.len());
    let ego = &world.agents[agent_index];
    let own = params[agent_index];
    let n = world.agents.len().saturating_sub(1);
    let mut horizon_lines = Vec::with_capacity(n);
    let mut step_lines = Vec::with_capacity(n);
    for (j, other) in world.agents.iter().enumerate() {
        if j == agent_index {
            continue;
        }
        let radius = effective_combined_radius(ego, other, mode);
        let pair = OrcaParams {
            cooperation: pairwise_share(own.cooperation, params[j].cooperation),
            ..own
        };
        horizon_lines.push(orca_line(ego, other, radius, &pair));
        let one_step = OrcaParams {
            time_horizon: own.dt,
            ..pair
        };
        step_lines.push(orca_line(
            ego,
            other,
            radius + ONE_STEP_CLEARANCE,
            &one_step,
        ));
    }
    let preferred = preferred_velocity(ego, goal_tolerance);
    solve_velocity_prioritized(&step_lines, &horizon_lines, preferred, own.v_max)
}

/// Next velocity of the human at `agent_index`, computed from the snapshot
/// `world`.
pub fn human_policy_step(
    world: &WorldState,
    agent_index: usize,
    params: &[OrcaParams],
    mode: OrcaMode,
    goal_tolerance: f64,
) -> Vec2 {
    debug_assert!(world.agents[agent_index].is_human());
    agent_policy_step(world, agent_index, params, mode, goal_tolerance).velocity
}
