use criterion::{criterion_group, criterion_main, Criterion};
use crowdsim_core::scenario::Heterogeneity;
use crowdsim_core::{run_episode, EnvConfig, Environment, ScenarioGenerator, ScriptedPolicy};

fn step(c: &mut Criterion) {
    let config = EnvConfig::default();
    let scenario = ScenarioGenerator::circle_crossing(Heterogeneity::Heterogeneous)
        .generate(11)
        .unwrap();
    let mut env = Environment::new(config).unwrap();
    env.reset(&scenario, 11).unwrap();
    for _ in 0..8 {
        let a = ScriptedPolicy::OrcaRobot.act(env.world(), env.config());
        env.step(a).unwrap();
    }
    let action = ScriptedPolicy::OrcaRobot.act(env.world(), env.config());
    c.bench_function("env_step/8_agents", |b| {
        b.iter_batched(
            || env.clone(),
            |mut e| e.step(action).unwrap().reward,
            criterion::BatchSize::SmallInput,
        )
    });
    c.bench_function("episode/orca", |b| {
        b.iter(|| run_episode(&config, &scenario, 11, ScriptedPolicy::OrcaRobot).unwrap())
    });
}

criterion_group!(benches, step);
criterion_main!(benches);
