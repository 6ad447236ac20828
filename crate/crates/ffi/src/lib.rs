//! C ABI over [`crowdsim_core::Environment`].
//!
//! Observation layout (version [`ABI_VERSION`]), all `f64`:
//!
//! ```text
//! robot_self[6]      d_goal, goal_dx, goal_dy, heading, v_pref, radius
//! per human, index order:
//!   static[2]        r_i, r_i + r_robot
//!   frames[k+1][5]   newest first: distance, dp.x, dp.y, dv.x, dv.y
//! ```
//!
//! so `len = 6 + n_humans * (2 + 5 * (k + 1))`. Termination codes: 0 running,
//! 1 goal, 2 collision, 3 timeout. Functions returning `i32`/`i64` report
//! failure with a negative value; the message is then available from
//! [`crowdsim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use crowdsim_core::scenario::Heterogeneity;
use crowdsim_core::{Action, EnvConfig, Environment, Error, ScenarioGenerator, ScenarioSource};

pub const ABI_VERSION: u32 = 1;

/// Returned when an output buffer is shorter than required.
pub const ERR_BUFFER: i32 = -2;
pub const ERR_GENERAL: i32 = -1;

/// One environment instance plus the scenario source it resets from.
pub struct Session {
    env: Environment,
    source: ScenarioSource,
    observation: Vec<f64>,
}

/// Output of [`Session::step`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub termination: i32,
    pub human_rewards: Vec<f64>,
}

impl Session {
    /// `None` selects the default config, or the default heterogeneous
    /// circle-crossing generator. The session is reset with `seed`.
    pub fn new(
        config_json: Option<&str>,
        scenario_json: Option<&str>,
        seed: u64,
    ) -> Result<Self, Error> {
        let config = match config_json {
            Some(text) if !text.trim().is_empty() => EnvConfig::from_json(text)?,
            _ => EnvConfig::default(),
        };
        let source = match scenario_json {
            Some(text) if !text.trim().is_empty() => ScenarioSource::from_json(text)?,
            _ => ScenarioSource::Generated(ScenarioGenerator::circle_crossing(
                Heterogeneity::Heterogeneous,
            )),
        };
        let mut env = Environment::new(config)?;
        env.set_policy_label("external");
        let mut session = Session {
            env,
            source,
            observation: Vec::new(),
        };
        session.reset(seed)?;
        Ok(session)
    }

    pub fn reset(&mut self, seed: u64) -> Result<&[f64], Error> {
        let scenario = self.source.resolve(seed)?;
        let obs = self.env.reset(&scenario, seed)?;
        self.observation.clear();
        obs.flatten_into(&mut self.observation);
        Ok(&self.observation)
    }

    pub fn step(&mut self, v: f64, dtheta: f64) -> Result<StepOutput, Error> {
        let result = self.env.step(Action::new(v, dtheta))?;
        self.observation.clear();
        result.observation.flatten_into(&mut self.observation);
        Ok(StepOutput {
            observation: self.observation.clone(),
            reward: result.reward,
            termination: result.termination.code(),
            human_rewards: result.info.human_rewards,
        })
    }

    pub fn observation_len(&self) -> usize {
        self.env.observation_len()
    }

    pub fn n_humans(&self) -> usize {
        self.env.n_humans()
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn write_log(&self, path: &Path) -> Result<(), Error> {
        self.env
            .log()
            .ok_or_else(|| Error::Usage("no episode has been started".to_string()))?
            .save(path)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

/// Runs `f`, turning errors and panics into `fallback` plus a stored message.
fn guard<T>(fallback: T, f: impl FnOnce() -> Result<T, String>) -> T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => v,
        Ok(Err(message)) => {
            set_error(message);
            fallback
        }
        Err(_) => {
            set_error("internal panic");
            fallback
        }
    }
}

unsafe fn optional_str<'a>(p: *const c_char) -> Result<Option<&'a str>, String> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| "string argument is not UTF-8".to_string())
}

unsafe fn session<'a>(handle: *mut Session) -> Result<&'a mut Session, String> {
    handle.as_mut().ok_or_else(|| "null handle".to_string())
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), String> {
    if len < src.len() {
        return Err(format!("buffer holds {len} values, {} needed", src.len()));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err("null output buffer".to_string());
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

#[no_mangle]
pub extern "C" fn crowdsim_abi_version() -> u32 {
    ABI_VERSION
}

/// Creates and resets a session. Either JSON argument may be null. Returns
/// null on failure.
///
/// # Safety
/// Non-null string arguments must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn crowdsim_create(
    config_json: *const c_char,
    scenario_json: *const c_char,
    seed: u64,
) -> *mut Session {
    guard(ptr::null_mut(), || {
        let config = optional_str(config_json)?;
        let scenario = optional_str(scenario_json)?;
        let session = Session::new(config, scenario, seed).map_err(|e| e.to_string())?;
        Ok(Box::into_raw(Box::new(session)))
    })
}

/// Starts a new episode; writes the observation and returns its length.
///
/// # Safety
/// `handle` must come from [`crowdsim_create`]; `out_obs` must hold `len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn crowdsim_reset(
    handle: *mut Session,
    seed: u64,
    out_obs: *mut f64,
    len: usize,
) -> i64 {
    guard(ERR_GENERAL as i64, || {
        let s = session(handle)?;
        let obs = s.reset(seed).map_err(|e| e.to_string())?;
        copy_out(obs, out_obs, len)?;
        Ok(obs.len() as i64)
    })
}

/// Advances one step. Writes the observation, the reward, the termination
/// code and each human's own reward for the robot.
///
/// # Safety
/// `handle` must come from [`crowdsim_create`]; the buffers must hold
/// `obs_len` and `n_humans` values; `out_reward` and `out_term` must be
/// valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn crowdsim_step(
    handle: *mut Session,
    v: f64,
    dtheta: f64,
    out_obs: *mut f64,
    obs_len: usize,
    out_reward: *mut f64,
    out_term: *mut i32,
    out_human_rewards: *mut f64,
    n_humans: usize,
) -> i32 {
    guard(ERR_GENERAL, || {
        let s = session(handle)?;
        if obs_len < s.observation_len() || n_humans < s.n_humans() {
            return Ok(ERR_BUFFER);
        }
        if out_reward.is_null() || out_term.is_null() {
            return Err("null reward or termination pointer".to_string());
        }
        let out = s.step(v, dtheta).map_err(|e| e.to_string())?;
        copy_out(&out.observation, out_obs, obs_len)?;
        copy_out(&out.human_rewards, out_human_rewards, n_humans)?;
        *out_reward = out.reward;
        *out_term = out.termination;
        Ok(0)
    })
    .min(0)
}

/// # Safety
/// `handle` must come from [`crowdsim_create`] or be null.
#[no_mangle]
pub unsafe extern "C" fn crowdsim_obs_len(handle: *mut Session) -> i64 {
    guard(ERR_GENERAL as i64, || {
        Ok(session(handle)?.observation_len() as i64)
    })
}

/// # Safety
/// `handle` must come from [`crowdsim_create`] or be null.
#[no_mangle]
pub unsafe extern "C" fn crowdsim_n_humans(handle: *mut Session) -> i64 {
    guard(
        ERR_GENERAL as i64,
        || Ok(session(handle)?.n_humans() as i64),
    )
}

/// Writes the current episode as a JSONL log.
///
/// # Safety
/// `handle` must come from [`crowdsim_create`]; `path` must be a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn crowdsim_write_log(handle: *mut Session, path: *const c_char) -> i32 {
    guard(ERR_GENERAL, || {
        let s = session(handle)?;
        let path = optional_str(path)?.ok_or_else(|| "null path".to_string())?;
        s.write_log(Path::new(path)).map_err(|e| e.to_string())?;
        Ok(0)
    })
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crowdsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `handle` must come from [`crowdsim_create`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn crowdsim_destroy(handle: *mut Session) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
