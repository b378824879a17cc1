use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use densecluster::certificate::{build_basis, build_w0, project_mu};
use densecluster::matops::{project_box_sum, spectral_norm, svt};
use densecluster::model::generate;
use densecluster::solvers::Method;
use densecluster::{rng_from_seed, ClusterLayout, ModelParams, PlantedGraph, SymMatrix};

fn planted(n: usize) -> PlantedGraph {
    let layout = ClusterLayout::contiguous(n, &[n / 4, n / 4]).unwrap();
    let params = ModelParams::new(vec![0.8, 0.8], 0.2).unwrap();
    generate(&layout, &params, 1, &mut rng_from_seed(1)).unwrap()
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("svt");
    for n in [64, 200] {
        let a = planted(n).adjacency();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| svt(black_box(a), 1.0).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("spectral_norm");
    for n in [100, 400] {
        let g = planted(n);
        let w0 = build_w0(&g, 0.05, Method::Intelligent);
        group.bench_with_input(BenchmarkId::from_parameter(n), &w0, |b, w0| {
            b.iter(|| spectral_norm(black_box(w0), 1e-8).unwrap())
        });
    }
    group.finish();

    let m = planted(200).adjacency().map(|x| x - 0.3);
    let target = 0.5 * (200 * 200) as f64;
    c.bench_function("project_box_sum/200", |b| {
        b.iter(|| project_box_sum(black_box(&m), 0.0, 1.0, target).unwrap())
    });

    let g = planted(400);
    let basis = build_basis(g.layout()).unwrap();
    let w0: SymMatrix = build_w0(&g, 0.025, Method::Intelligent);
    c.bench_function("project_mu/400", |b| {
        b.iter(|| project_mu(black_box(&w0), &basis))
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
