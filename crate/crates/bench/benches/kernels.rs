use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dyngossip::adversary::adversary_graph;
use dyngossip::evolution::max_flow;
use dyngossip::offline::{algorithm1, derandomize_S, Alg1Mode, Alg1Params};
use dyngossip_bench::{adversary_round, gather_instance, gnp_sequence, one_per_node, SEED};

fn flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_flow");
    for &(n, k) in &[(16, 8), (32, 16), (64, 16)] {
        let (evo, s, t) = gather_instance(n, k);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_k{k}")),
            &evo,
            |b, evo| b.iter(|| max_flow(black_box(evo), s, t).value),
        );
    }
    group.finish();
}

fn adversary(c: &mut Criterion) {
    let mut group = c.benchmark_group("adversary_round");
    for &n in &[32, 64, 128] {
        let (state, bcast) = adversary_round(n, n);
        group.bench_with_input(
            BenchmarkId::from_parameter(n),
            &(state, bcast),
            |b, (state, bcast)| b.iter(|| adversary_graph(black_box(state), black_box(bcast))),
        );
    }
    group.finish();
}

fn offline(c: &mut Criterion) {
    let (n, k) = (64, 16);
    let params = Alg1Params::new(n, k, Alg1Mode::Random);
    let seq = gnp_sequence(n, 0.1, params.budget() + n * k);
    let init = one_per_node(n, k);
    let mut group = c.benchmark_group("offline");
    group.sample_size(10);
    group.bench_function("algorithm1_random_n64_k16", |b| {
        b.iter(|| {
            algorithm1(&seq, black_box(&init), &params, SEED)
                .unwrap()
                .log
                .total_rounds
        })
    });
    let windows = params.nominal_windows();
    group.bench_function("derandomize_n64_k16", |b| {
        b.iter(|| {
            derandomize_S(&seq, black_box(&windows), params.s)
                .unwrap()
                .seed_set
        })
    });
    group.finish();
}

criterion_group!(benches, flow, adversary, offline);
criterion_main!(benches);
