//! Episode logs and their JSONL encoding.
//!
//! A log file holds one JSON object per line. The first line is the header
//! (`"type": "header"`) with the resolved environment config and scenario;
//! every following line is one step record (`"type": "step"`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{Action, EnvConfig};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::model::{AgentState, Termination};
use crate::reward::RewardBreakdown;
use crate::scenario::ScenarioConfig;

pub const LOG_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub position: Vec2,
    pub velocity: Vec2,
    pub heading: f64,
}

impl AgentSnapshot {
    pub fn of(agent: &AgentState) -> Self {
        AgentSnapshot {
            position: agent.position(),
            velocity: agent.velocity(),
            heading: agent.heading,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    pub config: EnvConfig,
    pub scenario: ScenarioConfig,
}

/// State after one step, with the (clamped) action that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub time: f64,
    pub action: Action,
    /// All agents in world order, robot first.
    pub agents: Vec<AgentSnapshot>,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    /// Robot inside each human's personal space, in human order.
    pub violations: Vec<bool>,
    pub termination: Termination,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLine {
    Header(LogHeader),
    Step(StepRecord),
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLineRef<'a> {
    Header(&'a LogHeader),
    Step(&'a StepRecord),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn termination(&self) -> Termination {
        self.steps
            .last()
            .map(|s| s.termination)
            .unwrap_or(Termination::Running)
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.header.scenario
    }

    /// Checks the structural invariants: one record per step, monotone
    /// time, only the last record terminal.
    pub fn validate(&self) -> Result<()> {
        let n_agents = self.header.scenario.agents.len();
        let mut last_time = 0.0;
        for (i, rec) in self.steps.iter().enumerate() {
            if rec.step != i as u64 + 1 {
                return Err(Error::Log(format!(
                    "record {i} has step {} (expected {})",
                    rec.step,
                    i + 1
                )));
            }
            if rec.time <= last_time {
                return Err(Error::Log(format!(
                    "time not increasing at step {}",
                    rec.step
                )));
            }
            last_time = rec.time;
            if rec.agents.len() != n_agents {
                return Err(Error::Log(format!(
                    "step {} has {} agents, scenario has {n_agents}",
                    rec.step,
                    rec.agents.len()
                )));
            }
            let last = i + 1 == self.steps.len();
            if rec.termination.is_terminal() != last {
                return Err(Error::Log(format!(
                    "unexpected termination {:?} at step {}",
                    rec.termination, rec.step
                )));
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &LogLineRef::Header(&self.header))?;
        out.write_all(b"\n")?;
        for rec in &self.steps {
            serde_json::to_writer(&mut out, &LogLineRef::Step(rec))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LogLine = serde_json::from_str(&line)
                .map_err(|e| Error::Log(format!("line {}: {e}", lineno + 1)))?;
            match parsed {
                LogLine::Header(h) if header.is_none() && steps.is_empty() => header = Some(h),
                LogLine::Header(_) => {
                    return Err(Error::Log(format!(
                        "line {}: unexpected header",
                        lineno + 1
                    )))
                }
                LogLine::Step(s) if header.is_some() => steps.push(s),
                LogLine::Step(_) => {
                    return Err(Error::Log("step record before header".to_string()))
                }
            }
        }
        let header = header.ok_or_else(|| Error::Log("missing header line".to_string()))?;
        if header.schema != LOG_SCHEMA {
            return Err(Error::Log(format!(
                "unsupported log schema {} (expected {LOG_SCHEMA})",
                header.schema
            )));
        }
        let log = EpisodeLog { header, steps };
        log.validate()?;
        Ok(log)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        self.write_jsonl(BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::read_jsonl(BufReader::new(file))
    }
}
