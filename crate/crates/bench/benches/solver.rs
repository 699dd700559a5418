use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cropplan_bench::{gated_program, rng};
use cropplan_core::model::{optimize, Objective, ObjectiveSpec};
use cropplan_core::pareto::{generate_front, FrontOptions, GridMode};
use cropplan_core::scenario::parse_scenario;
use cropplan_core::solver::{brute_force_milp, solve_lp, solve_milp, MilpOptions};

const TINY: &str = include_str!("../../core/fixtures/tiny_scenario.toml");

fn lp_and_milp(c: &mut Criterion) {
    let mut group = c.benchmark_group("gated_program");
    for binaries in [6, 10, 14] {
        let p = gated_program(&mut rng(binaries as u64), binaries, 4);
        group.bench_with_input(BenchmarkId::new("relaxation", binaries), &p, |b, p| b.iter(|| solve_lp(black_box(p))));
        group.bench_with_input(BenchmarkId::new("branch_and_bound", binaries), &p, |b, p| {
            b.iter(|| solve_milp(black_box(p)))
        });
        if binaries <= 10 {
            group.bench_with_input(BenchmarkId::new("brute_force", binaries), &p, |b, p| {
                b.iter(|| brute_force_milp(black_box(p)))
            });
        }
    }
    group.finish();
}

fn planning(c: &mut Criterion) {
    let s = parse_scenario(TINY).unwrap();
    c.bench_function("tiny_scenario/max_profit", |b| {
        b.iter(|| optimize(black_box(&s), &ObjectiveSpec::optimize(Objective::Profit), MilpOptions::default()))
    });
    let mut group = c.benchmark_group("tiny_scenario/front");
    group.sample_size(20);
    for (mode, g) in [(GridMode::Diagonal, 10), (GridMode::Full, 4)] {
        let options = FrontOptions { grid_size: g, mode, ..FrontOptions::default() };
        group.bench_with_input(BenchmarkId::new(mode.name(), g), &options, |b, o| {
            b.iter(|| generate_front(black_box(&s), o))
        });
    }
    group.finish();
}

criterion_group!(benches, lp_and_milp, planning);
criterion_main!(benches);
