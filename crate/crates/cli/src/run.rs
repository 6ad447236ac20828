use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crowdsim_core::scenario::{Heterogeneity, PassingParams};
use crowdsim_core::{
    run_episode, EnvConfig, ScenarioGenerator, ScenarioSource, ScriptedPolicy, SocialMode,
};

use crate::failure::{read_text, Failure};

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Built-in scenario generator (default circle-he).
    #[arg(long, value_enum, conflicts_with = "scenario_file")]
    scenario: Option<ScenarioChoice>,
    /// Scenario JSON: a fixed scenario or a `{"generator": ...}` object.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    episodes: u64,
    /// First seed; episode i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyChoice::Orca)]
    policy: PolicyChoice,
    /// Overrides the mode in the config file.
    #[arg(long, value_enum)]
    mode: Option<ModeChoice>,
    /// Environment config JSON; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "logs")]
    out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioChoice {
    CircleHe,
    CircleHo,
    Passing,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum PolicyChoice {
    Straight,
    Orca,
    External,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeChoice {
    Si,
    Sa,
}

/// Everything needed to reproduce a run; printed to stdout before running.
#[derive(Serialize)]
struct ResolvedRun<'a> {
    config: &'a EnvConfig,
    scenario: &'a ScenarioSource,
    policy: PolicyChoice,
    episodes: u64,
    seed: u64,
    workers: u64,
    out: &'a Path,
}

pub fn resolve_config(path: Option<&Path>, mode: Option<SocialMode>) -> Result<EnvConfig, Failure> {
    let mut config = match path {
        Some(p) => EnvConfig::from_json(&read_text(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => EnvConfig::default(),
    };
    if let Some(mode) = mode {
        config.reward.mode = mode;
    }
    config.validate()?;
    Ok(config)
}

fn resolve_scenario(args: &RunArgs) -> Result<ScenarioSource, Failure> {
    if let Some(path) = &args.scenario_file {
        return ScenarioSource::from_json(&read_text(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())));
    }
    let generator = match args.scenario.unwrap_or(ScenarioChoice::CircleHe) {
        ScenarioChoice::CircleHe => {
            ScenarioGenerator::circle_crossing(Heterogeneity::Heterogeneous)
        }
        ScenarioChoice::CircleHo => ScenarioGenerator::circle_crossing(Heterogeneity::Homogeneous),
        ScenarioChoice::Passing => ScenarioGenerator::Passing(PassingParams::default()),
    };
    Ok(ScenarioSource::Generated(generator))
}

pub fn run(args: RunArgs) -> Result<(), Failure> {
    let mode = args.mode.map(|m| match m {
        ModeChoice::Si => SocialMode::SociallyIntegrated,
        ModeChoice::Sa => SocialMode::SociallyAware,
    });
    let config = resolve_config(args.config.as_deref(), mode)?;
    let source = resolve_scenario(&args)?;
    let policy = match args.policy {
        PolicyChoice::Straight => ScriptedPolicy::StraightLine,
        PolicyChoice::Orca => ScriptedPolicy::OrcaRobot,
        PolicyChoice::External => {
            return Err(Failure::Input(
                "policy 'external' is driven through the crowdsim-ffi library, not the CLI"
                    .to_string(),
            ))
        }
    };
    let last = args
        .seed
        .checked_add(args.episodes - 1)
        .ok_or_else(|| Failure::Input("seed + episodes overflows u64".to_string()))?;

    let echo = ResolvedRun {
        config: &config,
        scenario: &source,
        policy: args.policy,
        episodes: args.episodes,
        seed: args.seed,
        workers: args.workers,
        out: &args.out,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&echo).expect("config serializes")
    );

    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers as usize)
        .build()
        .map_err(|e| Failure::Input(format!("worker pool: {e}")))?;
    let seeds: Vec<u64> = (args.seed..=last).collect();
    let results: Vec<Result<(), Failure>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let scenario = source.resolve(seed)?;
                let log = run_episode(&config, &scenario, seed, policy)?;
                let path = args.out.join(format!("episode_{seed}.jsonl"));
                log.save(&path).map_err(|e| match e {
                    crowdsim_core::Error::Io(io) => Failure::io(&path, io),
                    other => other.into(),
                })?;
                info!(
                    "seed {seed}: {:?} after {} steps",
                    log.termination(),
                    log.steps.len()
                );
                Ok(())
            })
            .collect()
    });
    // Report the failure of the lowest seed, independent of scheduling.
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    eprintln!("wrote {} logs to {}", seeds.len(), args.out.display());
    Ok(())
}
