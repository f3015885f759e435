use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use attachnet::compare::{kmeans_best_seed, FactorTable};
use attachnet::params::{fit_mle_with, fixture_dir, reference_model, FitOptions};
use attachnet::structure::{bootstrap_strengths, SearchConfig};
use attachnet::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bootstrap(c: &mut Criterion) {
    let (dag, params) = reference_model().unwrap();
    // A 12-item slice keeps one iteration short.
    let data = params.simulate(&dag, 2000, 1).unwrap();
    let keep: Vec<usize> = (0..12).collect();
    let items: Vec<String> = keep.iter().map(|&i| data.items()[i].clone()).collect();
    let rows: Vec<Vec<f64>> = data.rows().map(|r| keep.iter().map(|&i| r[i]).collect()).collect();
    let table = attachnet::ResponseTable::from_rows(items, rows).unwrap();

    let mut g = c.benchmark_group("bootstrap_16x500");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SearchConfig {
            execution: exec,
            seed: 3,
            ..SearchConfig::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(bootstrap_strengths(&table, 16, 500, cfg).unwrap()))
        });
    }
    g.finish();
}

fn kmeans(c: &mut Criterion) {
    let path = fixture_dir().join("lo_factors.csv");
    let data = FactorTable::read_csv(std::fs::File::open(path).unwrap()).unwrap();
    let mut g = c.benchmark_group("kmeans_4000_seeds");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| black_box(kmeans_best_seed(&data, 4, 1..=4000, exec).unwrap())));
    }
    g.finish();
}

fn fit(c: &mut Criterion) {
    let (dag, params) = reference_model().unwrap();
    let data = params.simulate(&dag, 20_000, 2).unwrap();
    let mut g = c.benchmark_group("fit_mle_36_items");
    for (name, exec) in MODES {
        let opts = FitOptions {
            execution: exec,
            ..FitOptions::default()
        };
        g.bench_function(name, |b| b.iter(|| black_box(fit_mle_with(&dag, &data, &opts).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, bootstrap, kmeans, fit);
criterion_main!(benches);
