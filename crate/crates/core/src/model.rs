//! Agent and world state, plus the distance predicates shared by the
//! policy, reward and metric code.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Speed below which a holonomic agent keeps its previous heading.
pub const HEADING_SPEED_EPS: f64 = 1e-6;

/// What any other agent can see: position, velocity and body radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

/// Known only to the agent itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub goal: Vec2,
    pub v_pref: f64,
    /// Preferred orientation. Carried as metadata; nothing consumes it.
    pub psi_pref: f64,
    /// Personal-space extent beyond the body radius.
    pub r_prox: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Robot,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub observable: ObservableState,
    pub hidden: HiddenState,
    pub heading: f64,
    pub kind: AgentKind,
}

impl AgentState {
    #[inline]
    pub fn position(&self) -> Vec2 {
        self.observable.position
    }

    #[inline]
    pub fn velocity(&self) -> Vec2 {
        self.observable.velocity
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.observable.radius
    }

    #[inline]
    pub fn r_prox(&self) -> f64 {
        self.hidden.r_prox
    }

    #[inline]
    pub fn is_human(&self) -> bool {
        self.kind == AgentKind::Human
    }

    /// Heading of a holonomic agent after its velocity changed: the velocity
    /// bearing, or the previous heading when (almost) standing still.
    pub fn heading_from_velocity(velocity: Vec2, previous: f64) -> f64 {
        if velocity.norm() < HEADING_SPEED_EPS {
            previous
        } else {
            velocity.angle()
        }
    }
}

/// Episode status after a step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[default]
    Running,
    Goal,
    Collision,
    Timeout,
}

impl Termination {
    /// Wire code used by the foreign-function boundary.
    pub fn code(self) -> i32 {
        match self {
            Termination::Running => 0,
            Termination::Goal => 1,
            Termination::Collision => 2,
            Termination::Timeout => 3,
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Termination::Running
    }
}

/// Full simulator state. Index 0 is the robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub agents: Vec<AgentState>,
    pub time: f64,
    pub step: u64,
}

impl WorldState {
    pub fn robot(&self) -> &AgentState {
        &self.agents[0]
    }

    /// Humans with their world indices.
    pub fn humans(&self) -> impl Iterator<Item = (usize, &AgentState)> {
        self.agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == AgentKind::Human)
    }

    pub fn human_count(&self) -> usize {
        self.agents.iter().filter(|a| a.is_human()).count()
    }
}

/// Center distance minus both body radii. Non-positive means the bodies
/// touch or overlap.
#[inline]
pub fn surface_distance(a: &AgentState, b: &AgentState) -> f64 {
    a.position().distance(b.position()) - a.radius() - b.radius()
}

/// Whether `intruder` is strictly inside `human`'s personal space.
#[inline]
pub fn proxemic_violation(intruder: &AgentState, human: &AgentState) -> bool {
    surface_distance(intruder, human) < human.r_prox()
}


#[cfg(test)]
mod tests {
    use super::fixtures::agent;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn surface_distance_examples() {
        let a = agent(AgentKind::Robot, 0.0, 0.0, 0.0);
        let b = agent(AgentKind::Human, 1.0, 0.0, 0.0);
        assert!((surface_distance(&a, &b) - 0.4).abs() < 1e-12);
        let c = agent(AgentKind::Human, 0.6, 0.0, 0.0);
        assert!(surface_distance(&a, &c).abs() < 1e-12);
        let d = agent(AgentKind::Human, 0.0, 0.0, 0.0);
        assert!((surface_distance(&a, &d) + 0.6).abs() < 1e-12);
    }

    #[test]
    fn violation_is_strict() {
        let robot = agent(AgentKind::Robot, 0.0, 0.0, 0.0);
        // surface distance 0.5
        assert!(proxemic_violation(
            &robot,
            &agent(AgentKind::Human, 1.1, 0.0, 0.8)
        ));
        assert!(!proxemic_violation(
            &robot,
            &agent(AgentKind::Human, 1.1, 0.0, 0.0)
        ));
        // surface distance 0.8 at exactly r_prox: use exactly representable values
        let mut r = agent(AgentKind::Robot, 0.0, 0.0, 0.0);
        r.observable.radius = 0.25;
        let mut h = agent(AgentKind::Human, 1.5, 0.0, 0.75);
        h.observable.radius = 0.5;
        assert_eq!(surface_distance(&r, &h), 0.75);
        assert!(!proxemic_violation(&r, &h));
    }

    #[test]
    fn heading_falls_back_when_still() {
        assert_eq!(AgentState::heading_from_velocity(Vec2::ZERO, 1.25), 1.25);
        let h = AgentState::heading_from_velocity(Vec2::new(0.0, 2.0), 0.0);
        assert!((h - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn surface_distance_is_rigid_invariant(
            ax in -10.0..10.0f64, ay in -10.0..10.0f64,
            bx in -10.0..10.0f64, by in -10.0..10.0f64,
            tx in -50.0..50.0f64, ty in -50.0..50.0f64,
            rot in -3.2..3.2f64,
            ra in 0.05..1.0f64, rb in 0.05..1.0f64,
        ) {
            let mut a = agent(AgentKind::Robot, ax, ay, 0.0);
            let mut b = agent(AgentKind::Human, bx, by, 0.5);
            a.observable.radius = ra;
            b.observable.radius = rb;
            let d = surface_distance(&a, &b);
            prop_assert!((d - surface_distance(&b, &a)).abs() < 1e-12);
            let t = Vec2::new(tx, ty);
            a.observable.position = a.position().rotate(rot) + t;
            b.observable.position = b.position().rotate(rot) + t;
            prop_assert!((d - surface_distance(&a, &b)).abs() < 1e-9);
        }

        #[test]
        fn collision_implies_violation(
            x in -0.6..0.6f64, y in -0.6..0.6f64, r_prox in 1e-6..0.8f64,
        ) {
            let robot = agent(AgentKind::Robot, 0.0, 0.0, 0.0);
            let human = agent(AgentKind::Human, x, y, r_prox);
            let d = surface_distance(&robot, &human);
            if d <= 0.0 {
                prop_assert!(proxemic_violation(&robot, &human));
            }
            if proxemic_violation(&robot, &human) {
                prop_assert!(d < 0.8);
            }
        }
    }
}
