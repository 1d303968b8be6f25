use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphw_core::models::{sample_er, ErgmChain};
use graphw_core::rng::stream_rng;
use graphw_core::statistic::{w_brute_force, w_one_sample, w_two_sample};
use graphw_core::testing::{two_sample_permutation_test, PermutationConfig};
use graphw_core::{EdgeMarginals, ErgmStats, Graph, ModelSpec};

fn hamming(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamming_distance");
    for v in [10, 64, 256] {
        let mut rng = stream_rng(1, 0);
        let s = sample_er(v, 0.5, 2, &mut rng).unwrap();
        let (a, b) = (&s.graphs()[0], &s.graphs()[1]);
        group.bench_with_input(BenchmarkId::from_parameter(v), &v, |bench, _| {
            bench.iter(|| black_box(a).hamming_distance(black_box(b)).unwrap())
        });
    }
    group.finish();
}

fn statistic(c: &mut Criterion) {
    let mut rng = stream_rng(2, 0);
    let s = sample_er(30, 0.5, 200, &mut rng).unwrap();
    let t = sample_er(30, 0.5, 200, &mut rng).unwrap();
    let null = EdgeMarginals::constant(30, 0.5).unwrap();
    c.bench_function("w_one_sample v=30 n=200", |b| {
        b.iter(|| w_one_sample(black_box(&s), &null).unwrap())
    });
    c.bench_function("w_two_sample v=30 n=m=200", |b| {
        b.iter(|| w_two_sample(black_box(&s), black_box(&t)).unwrap())
    });

    let small = sample_er(5, 0.5, 10, &mut rng).unwrap();
    let null5 = EdgeMarginals::constant(5, 0.5).unwrap();
    c.bench_function("w_brute_force v=5 n=10", |b| {
        b.iter(|| w_brute_force(black_box(&small), &null5).unwrap())
    });
}

fn mcmc(c: &mut Criterion) {
    let mut group = c.benchmark_group("mh_sweep");
    for v in [8, 12, 30] {
        let spec = ModelSpec::ergm(v, ErgmStats::EdgeTriangle, [-1.0, 0.2]).unwrap();
        let mut chain = ErgmChain::new(&spec, Graph::empty(v)).unwrap();
        let mut rng = stream_rng(3, 0);
        group.bench_with_input(BenchmarkId::from_parameter(v), &v, |b, _| {
            b.iter(|| chain.sweep(&mut rng))
        });
    }
    group.finish();
}

fn permutation(c: &mut Criterion) {
    let mut rng = stream_rng(4, 0);
    let s = sample_er(10, 0.5, 30, &mut rng).unwrap();
    let t = sample_er(10, 0.5, 30, &mut rng).unwrap();
    let cfg = PermutationConfig::new(1000, 5);
    let mut group = c.benchmark_group("permutation_test");
    group.sample_size(20);
    group.bench_function("v=10 n=m=30 R=1000", |b| {
        b.iter(|| two_sample_permutation_test(black_box(&s), black_box(&t), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, hamming, statistic, mcmc, permutation);
criterion_main!(benches);
