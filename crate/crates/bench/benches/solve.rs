use std::hint::black_box;

use conpart_bench::{corpus, homogeneous_corpus};
use conpart_core::generate::Shape;
use conpart_core::homogeneous::classify_six_dual;
use conpart_core::lifting::{lift_problem, LiftMap};
use conpart_core::partition::ClassifyOptions;
use conpart_core::{classify, examples, solve, SolveOptions};
use criterion::{criterion_group, criterion_main, Criterion};

fn solver(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut g = c.benchmark_group("solve");
    for p in [
        examples::sdp_example(),
        examples::mixed_refined(),
        examples::trivial_lp(),
    ] {
        g.bench_function(p.name.clone(), |b| {
            b.iter(|| solve(black_box(&p), &opts).unwrap())
        });
    }
    let mixed = corpus(&Shape::mixed(), 8, 1);
    g.bench_function("mixed_random_x8", |b| {
        b.iter(|| {
            mixed
                .iter()
                .map(|p| solve(p, &opts).unwrap().optimal_value)
                .sum::<f64>()
        })
    });
    g.finish();
}

fn partition(c: &mut Criterion) {
    let opts = ClassifyOptions::default();
    let mut g = c.benchmark_group("classify");
    g.sample_size(20);
    for p in [
        examples::sdp_example(),
        examples::mixed_coarse(),
        examples::mixed_refined(),
    ] {
        g.bench_function(p.name.clone(), |b| {
            b.iter(|| classify(black_box(&p), &opts).unwrap())
        });
    }
    let socp = corpus(&Shape::lorentz(), 4, 2);
    g.bench_function("socp_random_x4", |b| {
        b.iter(|| {
            socp.iter()
                .map(|p| classify(p, &opts).unwrap().four.r.len())
                .sum::<usize>()
        })
    });
    let lifted: Vec<_> = socp
        .iter()
        .map(|p| lift_problem(p, &LiftMap::arrow(&p.blocks).unwrap()).unwrap())
        .collect();
    g.bench_function("socp_arrow_lifted_x4", |b| {
        b.iter(|| {
            lifted
                .iter()
                .map(|p| classify(p, &opts).unwrap().four.r.len())
                .sum::<usize>()
        })
    });
    g.finish();
}

fn homogeneous(c: &mut Criterion) {
    let problems = homogeneous_corpus(10, 3);
    c.bench_function("classify_six_dual_x10", |b| {
        b.iter(|| {
            problems
                .iter()
                .map(|p| classify_six_dual(p).unwrap().c.len())
                .sum::<usize>()
        })
    });
}

criterion_group!(benches, solver, partition, homogeneous);
criterion_main!(benches);
