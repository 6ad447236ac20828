use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crowdsim_core::crowd::CrowdSim;
use crowdsim_core::orca::agent_policy_step;
use crowdsim_core::scenario::Heterogeneity;
use crowdsim_core::{solve_velocity, HalfPlane, OrcaMode, ScenarioGenerator, Vec2};

/// Lines tangent to a circle of radius 0.6 around (0.4, 0), facing outward,
/// so that the preferred velocity is cut off by several of them.
fn fan(n: usize) -> Vec<HalfPlane> {
    (0..n)
        .map(|i| {
            let a = i as f64 / n as f64 * std::f64::consts::PI - std::f64::consts::FRAC_PI_2;
            let normal = Vec2::new(a.cos(), a.sin());
            HalfPlane {
                point: Vec2::new(0.4, 0.0) - normal * 0.6,
                direction: Vec2::new(normal.y, -normal.x),
            }
        })
        .collect()
}

fn lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_velocity");
    for n in [4, 16, 64] {
        let lines = fan(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &lines, |b, lines| {
            b.iter(|| solve_velocity(black_box(lines), Vec2::new(1.0, 0.0), 1.0))
        });
    }
    group.finish();
}

fn crowd(c: &mut Criterion) {
    let scenario = ScenarioGenerator::CircleCrossing {
        n_agents: 20,
        heterogeneity: Heterogeneity::Heterogeneous,
        circle_radius: 6.0,
    }
    .generate(3)
    .unwrap();
    let mut sim = CrowdSim::from_scenario(&scenario, OrcaMode::SociallyIntegrated, 5.0, 0.25);
    for _ in 0..12 {
        sim.step();
    }
    let params: Vec<_> = scenario
        .agents
        .iter()
        .map(|a| crowdsim_core::OrcaParams {
            time_horizon: 5.0,
            dt: 0.25,
            cooperation: a.cooperation,
            v_max: a.v_pref,
        })
        .collect();
    let world = sim.world().clone();
    c.bench_function("agent_policy_step/20_agents", |b| {
        b.iter(|| {
            agent_policy_step(
                black_box(&world),
                7,
                &params,
                OrcaMode::SociallyIntegrated,
                0.3,
            )
        })
    });
    c.bench_function("crowd_step/20_agents", |b| {
        b.iter_batched(
            || sim.clone(),
            |mut s| s.step(),
            criterion::BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, lp, crowd);
criterion_main!(benches);
