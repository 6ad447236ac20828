//! Social-impact and efficiency metrics computed from episode logs.
//!
//! Everything here is a pure function of an [`EpisodeLog`]: violations and
//! the human return are recomputed from logged positions and velocities
//! together with the scenario's personal-space radii, so replaying a log
//! with edited radii gives the metrics for the edited radii.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::log::{AgentSnapshot, EpisodeLog};
use crate::model::{proxemic_violation, AgentState, HiddenState, ObservableState, Termination};
use crate::reward::human_discomfort;
use crate::scenario::{AgentSpec, ScenarioKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub scenario_kind: ScenarioKind,
    pub seed: u64,
    pub steps: u64,
    pub success: bool,
    pub collision: bool,
    pub timeout: bool,
    /// Human-steps with the robot inside that human's personal space.
    pub proxemic_violations: u64,
    /// Only for successful episodes.
    pub robot_distance_ratio: Option<f64>,
    pub robot_time_ratio: Option<f64>,
    /// Means over the humans that reached their goal.
    pub human_distance_ratio: Option<f64>,
    pub human_time_ratio: Option<f64>,
    pub humans_reached: usize,
    pub humans_excluded: usize,
    /// Sum over steps and all humans of each human's reward for the robot.
    pub human_return: f64,
}

fn state_at(spec: &AgentSpec, snap: &AgentSnapshot, r_prox: f64) -> AgentState {
    AgentState {
        observable: ObservableState {
            position: snap.position,
            velocity: snap.velocity,
            radius: spec.radius,
        },
        hidden: HiddenState {
            goal: spec.goal,
            v_pref: spec.v_pref,
            psi_pref: spec.psi_pref,
            r_prox,
        },
        heading: snap.heading,
        kind: spec.kind,
    }
}

/// Path length and straight-line length of a trajectory prefix, and the
/// resulting ratios; `None` when the straight line has zero length.
fn path_ratios(
    points: impl Iterator<Item = Vec2>,
    elapsed: f64,
    v_pref: f64,
) -> Option<(f64, f64)> {
    let mut iter = points;
    let start = iter.next()?;
    let mut length = 0.0;
    let mut last = start;
    for p in iter {
        length += p.distance(last);
        last = p;
    }
    let straight = start.distance(last);
    if straight <= 0.0 {
        return None;
    }
    Some((length / straight, elapsed / (straight / v_pref)))
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn episode_metrics(log: &EpisodeLog) -> Result<EpisodeMetrics> {
    let termination = log.termination();
    if !termination.is_terminal() {
        return Err(Error::Log("episode has not terminated".to_string()));
    }
    let scenario = log.scenario();
    let config = &log.header.config;
    let robot_spec = &scenario.agents[0];

    let mut violations = 0u64;
    let mut human_return = 0.0;
    for rec in &log.steps {
        let robot = state_at(robot_spec, &rec.agents[0], 0.0);
        for (spec, snap) in scenario.agents.iter().zip(&rec.agents).skip(1) {
            let human = state_at(spec, snap, spec.r_prox);
            if proxemic_violation(&robot, &human) {
                violations += 1;
            }
            human_return +=
                human_discomfort(&human, &robot, config.reward.r_v, config.reward.r_prox);
        }
    }

    let success = termination == Termination::Goal;
    let elapsed = log.steps.last().map(|s| s.time).unwrap_or(0.0);
    let (robot_distance_ratio, robot_time_ratio) = if success {
        let points =
            std::iter::once(robot_spec.start).chain(log.steps.iter().map(|s| s.agents[0].position));
        match path_ratios(points, elapsed, robot_spec.v_pref) {
            Some((d, t)) => (Some(d), Some(t)),
            None => (None, None),
        }
    } else {
        (None, None)
    };

    let mut human_d = Vec::new();
    let mut human_t = Vec::new();
    let mut excluded = 0;
    for (idx, spec) in scenario.agents.iter().enumerate().skip(1) {
        let reached = log
            .steps
            .iter()
            .position(|s| s.agents[idx].position.distance(spec.goal) < config.human_goal_tolerance);
        let Some(last) = reached else {
            excluded += 1;
            continue;
        };
        let points = std::iter::once(spec.start)
            .chain(log.steps[..=last].iter().map(|s| s.agents[idx].position));
        match path_ratios(points, log.steps[last].time, spec.v_pref) {
            Some((d, t)) => {
                human_d.push(d);
                human_t.push(t);
            }
            None => excluded += 1,
        }
    }

    Ok(EpisodeMetrics {
        scenario_kind: scenario.kind,
        seed: log.header.seed,
        steps: log.steps.len() as u64,
        success,
        collision: termination == Termination::Collision,
        timeout: termination == Termination::Timeout,
        proxemic_violations: violations,
        robot_distance_ratio,
        robot_time_ratio,
        human_distance_ratio: mean(&human_d),
        human_time_ratio: mean(&human_t),
        humans_reached: human_d.len(),
        humans_excluded: excluded,
        human_return,
    })
}

/// Mean and population standard deviation over the values that exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let Some(mu) = mean(&values) else {
            return Stat::default();
        };
        let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64;
        Stat {
            n: values.len(),
            mean: Some(mu),
            std: Some(var.sqrt()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub group: String,
    pub episodes: usize,
    pub successes: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub proxemic_violations: u64,
    pub robot_distance_ratio: Stat,
    pub robot_time_ratio: Stat,
    pub human_distance_ratio: Stat,
    pub human_time_ratio: Stat,
    pub human_return: Stat,
    pub humans_excluded: usize,
}

pub fn aggregate(group: &str, metrics: &[EpisodeMetrics]) -> Result<Summary> {
    if metrics.is_empty() {
        return Err(Error::Config("cannot aggregate zero episodes".to_string()));
    }
    Ok(Summary {
        group: group.to_string(),
        episodes: metrics.len(),
        successes: metrics.iter().filter(|m| m.success).count(),
        collisions: metrics.iter().filter(|m| m.collision).count(),
        timeouts: metrics.iter().filter(|m| m.timeout).count(),
        proxemic_violations: metrics.iter().map(|m| m.proxemic_violations).sum(),
        robot_distance_ratio: Stat::of(metrics.iter().filter_map(|m| m.robot_distance_ratio)),
        robot_time_ratio: Stat::of(metrics.iter().filter_map(|m| m.robot_time_ratio)),
        human_distance_ratio: Stat::of(metrics.iter().filter_map(|m| m.human_distance_ratio)),
        human_time_ratio: Stat::of(metrics.iter().filter_map(|m| m.human_time_ratio)),
        human_return: Stat::of(metrics.iter().map(|m| m.human_return)),
        humans_excluded: metrics.iter().map(|m| m.humans_excluded).sum(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Column order of the per-episode metrics CSV.
pub const EPISODE_CSV_HEADER: &str = "scenario,seed,steps,success,collision,timeout,\
proxemic_violations,robot_distance_ratio,robot_time_ratio,human_distance_ratio,\
human_time_ratio,humans_reached,humans_excluded,human_return";

impl EpisodeMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario_kind.label(),
            self.seed,
            self.steps,
            self.success as u8,
            self.collision as u8,
            self.timeout as u8,
            self.proxemic_violations,
            opt(self.robot_distance_ratio),
            opt(self.robot_time_ratio),
            opt(self.human_distance_ratio),
            opt(self.human_time_ratio),
            self.humans_reached,
            self.humans_excluded,
            self.human_return
        )
    }
}

/// Column order of the aggregate CSV; one row per group.
pub const SUMMARY_CSV_HEADER: &str = "group,episodes,successes,collisions,timeouts,\
proxemic_violations,robot_distance_ratio_mean,robot_distance_ratio_std,\
robot_time_ratio_mean,robot_time_ratio_std,human_distance_ratio_mean,\
human_distance_ratio_std,human_time_ratio_mean,human_time_ratio_std,\
human_return_mean,human_return_std,humans_excluded";

impl Summary {
    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{},{},{}",
            self.group,
            self.episodes,
            self.successes,
            self.collisions,
            self.timeouts,
            self.proxemic_violations
        );
        for s in [
            &self.robot_distance_ratio,
            &self.robot_time_ratio,
            &self.human_distance_ratio,
            &self.human_time_ratio,
            &self.human_return,
        ] {
            let _ = write!(row, ",{},{}", opt(s.mean), opt(s.std));
        }
        let _ = write!(row, ",{}", self.humans_excluded);
        row
    }

    /// Human-readable table line.
    pub fn display_row(&self) -> String {
        fn pm(s: &Stat) -> String {
            match (s.mean, s.std) {
                (Some(m), Some(d)) => format!("{m:.2} ± {d:.2}"),
                _ => "-".to_string(),
            }
        }
        format!(
            "{:<20} {:>4} {:>5} {:>5} {:>8} {:>6} {:>14} {:>14} {:>14} {:>14} {:>16}",
            self.group,
            self.episodes,
            self.collisions,
            self.timeouts,
            self.successes,
            self.proxemic_violations,
            pm(&self.robot_distance_ratio),
            pm(&self.robot_time_ratio),
            pm(&self.human_distance_ratio),
            pm(&self.human_time_ratio),
            pm(&self.human_return)
        )
    }

    pub fn display_header() -> String {
        format!(
            "{:<20} {:>4} {:>5} {:>5} {:>8} {:>6} {:>14} {:>14} {:>14} {:>14} {:>16}",
            "group",
            "eps",
            "col",
            "tout",
            "success",
            "prox",
            "robot dist",
            "robot time",
            "human dist",
            "human time",
            "human return"
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(ret: f64, success: bool) -> EpisodeMetrics {
        EpisodeMetrics {
            scenario_kind: ScenarioKind::Custom,
            seed: 0,
            steps: 10,
            success,
            collision: !success,
            timeout: false,
            proxemic_violations: 2,
            robot_distance_ratio: success.then_some(1.1),
            robot_time_ratio: success.then_some(1.2),
            human_distance_ratio: None,
            human_time_ratio: None,
            humans_reached: 0,
            humans_excluded: 1,
            human_return: ret,
        }
    }

    #[test]
    fn single_episode_has_zero_spread() {
        let s = aggregate("all", &[metrics(-1.0, true)]).unwrap();
        assert_eq!(s.human_return.mean, Some(-1.0));
        assert_eq!(s.human_return.std, Some(0.0));
        assert_eq!(s.robot_distance_ratio.mean, Some(1.1));
    }

    #[test]
    fn two_episode_population_sigma() {
        let s = aggregate("all", &[metrics(-1.0, true), metrics(-2.0, false)]).unwrap();
        assert_eq!(s.human_return.mean, Some(-1.5));
        assert_eq!(s.human_return.std, Some(0.5));
        assert_eq!(s.successes, 1);
        assert_eq!(s.collisions, 1);
        assert_eq!(s.proxemic_violations, 4);
        // ratio only from the successful one
        assert_eq!(s.robot_distance_ratio.n, 1);
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(aggregate("all", &[]).is_err());
    }

    #[test]
    fn csv_rows_match_headers() {
        let m = metrics(-1.0, true);
        assert_eq!(
            m.csv_row().split(',').count(),
            EPISODE_CSV_HEADER.split(',').count()
        );
        let s = aggregate("circle_crossing_he", &[m]).unwrap();
        assert_eq!(
            s.csv_row().split(',').count(),
            SUMMARY_CSV_HEADER.split(',').count()
        );
    }

    #[test]
    fn detour_ratio() {
        // 3-4-5: path 3 + 4 = 7 over straight 5.
        let pts = [Vec2::ZERO, Vec2::new(3.0, 0.0), Vec2::new(3.0, 4.0)];
        let (d, t) = path_ratios(pts.into_iter(), 7.0, 1.0).unwrap();
        assert!((d - 1.4).abs() < 1e-12);
        assert!((t - 1.4).abs() < 1e-12);
        assert!(path_ratios([Vec2::ZERO, Vec2::ZERO].into_iter(), 1.0, 1.0).is_none());
    }
}
