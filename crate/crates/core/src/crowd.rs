//! Robot-free crowd rollouts: every agent of a scenario walks as an ORCA
//! human. Used to check the crowd model on its own.

use crate::geometry::Vec2;
use crate::model::{surface_distance, AgentKind, AgentState, WorldState};
use crate::orca::{agent_policy_step, OrcaMode, OrcaParams};
use crate::scenario::ScenarioConfig;

#[derive(Clone, Debug)]
pub struct CrowdSim {
    world: WorldState,
    params: Vec<OrcaParams>,
    mode: OrcaMode,
    goal_tolerance: f64,
    dt: f64,
}

/// Outcome of one synchronous crowd update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CrowdStep {
    /// Agents whose linear program had no feasible point.
    pub infeasible: usize,
    /// Smallest pairwise surface distance after the move.
    pub min_surface_distance: f64,
    /// Ordered pairs (i, j) with j inside i's personal space.
    pub proxemic_violations: usize,
}

impl CrowdSim {
    /// Every agent, including the scenario's robot, becomes a human.
    pub fn from_scenario(
        scenario: &ScenarioConfig,
        mode: OrcaMode,
        time_horizon: f64,
        dt: f64,
    ) -> Self {
        let agents = scenario
            .agents
            .iter()
            .map(|spec| AgentState {
                observable: crate::model::ObservableState {
                    position: spec.start,
                    velocity: Vec2::ZERO,
                    radius: spec.radius,
                },
                hidden: crate::model::HiddenState {
                    goal: spec.goal,
                    v_pref: spec.v_pref,
                    psi_pref: spec.psi_pref,
                    r_prox: spec.r_prox,
                },
                heading: (spec.goal - spec.start).angle(),
                kind: AgentKind::Human,
            })
            .collect();
        let params = scenario
            .agents
            .iter()
            .map(|spec| OrcaParams {
                time_horizon,
                dt,
                cooperation: spec.cooperation,
                v_max: spec.v_pref,
            })
            .collect();
        CrowdSim {
            world: WorldState {
                agents,
                time: 0.0,
                step: 0,
            },
            params,
            mode,
            goal_tolerance: 0.3,
            dt,
        }
    }

    /// Replaces every agent's cooperation coefficient.
    pub fn with_cooperation(mut self, cooperation: f64) -> Self {
        for p in &mut self.params {
            p.cooperation = cooperation;
        }
        self
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn all_at_goal(&self) -> bool {
        self.world
            .agents
            .iter()
            .all(|a| a.position().distance(a.hidden.goal) < self.goal_tolerance)
    }

    pub fn step(&mut self) -> CrowdStep {
        let snapshot = self.world.clone();
        let mut infeasible = 0;
        let solutions: Vec<Vec2> = (0..snapshot.agents.len())
            .map(|i| {
                let s =
                    agent_policy_step(&snapshot, i, &self.params, self.mode, self.goal_tolerance);
                if !s.feasible {
                    infeasible += 1;
                }
                s.velocity
            })
            .collect();
        for (agent, v) in self.world.agents.iter_mut().zip(solutions) {
            agent.observable.velocity = v;
            agent.observable.position += v * self.dt;
            agent.heading = AgentState::heading_from_velocity(v, agent.heading);
        }
        self.world.step += 1;
        self.world.time = self.world.step as f64 * self.dt;
        CrowdStep {
            infeasible,
            min_surface_distance: self.min_surface_distance(),
            proxemic_violations: self.proxemic_violations(),
        }
    }

    pub fn min_surface_distance(&self) -> f64 {
        let a = &self.world.agents;
        let mut min = f64::INFINITY;
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                min = min.min(surface_distance(&a[i], &a[j]));
            }
        }
        min
    }

    pub fn proxemic_violations(&self) -> usize {
        let a = &self.world.agents;
        let mut count = 0;
        for i in 0..a.len() {
            for j in 0..a.len() {
                if i != j && surface_distance(&a[i], &a[j]) < a[i].r_prox() {
                    count += 1;
                }
            }
        }
        count
    }
}
