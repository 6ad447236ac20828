use std::fmt::Write as _;
use std::path::Path;

use crowdsim_core::log::AgentSnapshot;
use crowdsim_core::{AgentKind, EpisodeLog, SocialMode, Termination, Vec2};

use crate::eval::write;
use crate::failure::{load_log, Failure};

pub const PLOT_CSV_HEADER: &str = "step,time,agent,kind,x,y,vx,vy,heading,radius,r_prox,event";

pub fn plotdata(log_path: &Path, out: &Path) -> Result<(), Failure> {
    let log = load_log(log_path)?;
    write(out, &render(&log))
}

/// One row per agent per instant, starting with the initial state at step 0.
/// Human rows carry `violation` while the robot is inside their personal
/// space and `collision` on contact; the robot's final row carries the
/// termination.
pub fn render(log: &EpisodeLog) -> String {
    let scenario = log.scenario();
    let config = &log.header.config;
    let robot_r_prox = match config.mode() {
        SocialMode::SociallyIntegrated => 0.0,
        SocialMode::SociallyAware => config.reward.r0_prox,
    };
    let initial: Vec<AgentSnapshot> = scenario
        .agents
        .iter()
        .map(|a| AgentSnapshot {
            position: a.start,
            velocity: Vec2::ZERO,
            heading: (a.goal - a.start).angle(),
        })
        .collect();

    let mut csv = format!("{PLOT_CSV_HEADER}\n");
    let mut emit =
        |step: u64, time: f64, agents: &[AgentSnapshot], violations: &[bool], end: Termination| {
            let robot = agents[0].position;
            for (i, (snap, spec)) in agents.iter().zip(&scenario.agents).enumerate() {
                let (kind, r_prox) = match spec.kind {
                    AgentKind::Robot => ("robot", robot_r_prox),
                    AgentKind::Human => ("human", spec.r_prox),
                };
                let event = if i == 0 {
                    match end {
                        Termination::Goal => "goal",
                        Termination::Collision => "collision",
                        Termination::Timeout => "timeout",
                        Termination::Running => "",
                    }
                } else if snap.position.distance(robot) < spec.radius + scenario.agents[0].radius {
                    "collision"
                } else if violations.get(i - 1).copied().unwrap_or(false) {
                    "violation"
                } else {
                    ""
                };
                writeln!(
                    csv,
                    "{step},{time},{i},{kind},{},{},{},{},{},{},{r_prox},{event}",
                    snap.position.x,
                    snap.position.y,
                    snap.velocity.x,
                    snap.velocity.y,
                    snap.heading,
                    spec.radius,
                )
                .unwrap();
            }
        };
    let start = initial[0].position;
    let initial_violations: Vec<bool> = scenario
        .agents
        .iter()
        .skip(1)
        .map(|h| h.start.distance(start) - h.radius - scenario.agents[0].radius < h.r_prox)
        .collect();
    emit(0, 0.0, &initial, &initial_violations, Termination::Running);
    for rec in &log.steps {
        emit(
            rec.step,
            rec.time,
            &rec.agents,
            &rec.violations,
            rec.termination,
        );
    }
    csv
}
