use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use netbatch_bench::fixture;
use netbatch_core::baselines::greedy_first_fit;
use netbatch_core::occupancy::DEFAULT_DENSE_THRESHOLD;
use netbatch_core::{
    evaluate_batches, fallback_assign, run_pipeline, OccupancyMap, PipelineConfig, Representation,
    Strategy,
};

fn occupancy(c: &mut Criterion) {
    let nl = fixture(500, 8, 5_000, 1);
    let mut group = c.benchmark_group("occupancy/mark_and_query");
    for rep in [Representation::Dense, Representation::Sparse] {
        group.bench_with_input(BenchmarkId::from_parameter(rep), &rep, |b, &rep| {
            let mut map = OccupancyMap::new(*nl.grid(), rep);
            b.iter(|| {
                map.clear();
                let mut hits = 0;
                for net in nl.nets() {
                    if map.collides(net) {
                        hits += 1;
                    } else {
                        map.mark_net(net).unwrap();
                    }
                }
                black_box(hits)
            })
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let nl = fixture(600, 8, 20_000, 2);
    let batches = fallback_assign(&nl, 30, 0).group(30);
    let mut group = c.benchmark_group("evaluate_batches");
    for rep in [Representation::Dense, Representation::Sparse] {
        group.bench_with_input(BenchmarkId::from_parameter(rep), &rep, |b, &rep| {
            b.iter(|| black_box(evaluate_batches(&batches, &nl, rep).unwrap()))
        });
    }
    group.finish();
}

fn pipeline_vs_baselines(c: &mut Criterion) {
    let nl = fixture(600, 8, 20_000, 3);
    let mut group = c.benchmark_group("batching_20k");
    group.sample_size(10);
    group.bench_function("pipeline", |b| {
        b.iter(|| black_box(run_pipeline(&nl, &PipelineConfig::default()).unwrap()))
    });
    for s in Strategy::ALL {
        group.bench_function(format!("first-fit/{s}"), |b| {
            b.iter(|| black_box(greedy_first_fit(&nl, s, DEFAULT_DENSE_THRESHOLD)))
        });
    }
    group.finish();
}

criterion_group!(benches, occupancy, evaluation, pipeline_vs_baselines);
criterion_main!(benches);
