use attachnet::compare::{kmeans_best_seed, FactorTable};
use attachnet::params::{fit_mle_with, reference_model, FitOptions};
use attachnet::structure::{bootstrap_strengths, SearchConfig};
use attachnet::Execution;

#[test]
fn bootstrap_identical_in_both_modes() {
    let (dag, params) = reference_model().unwrap();
    let table = params.simulate(&dag, 800, 5).unwrap();
    let run = |execution| {
        let cfg = SearchConfig {
            seed: 9,
            execution,
            ..SearchConfig::default()
        };
        bootstrap_strengths(&table, 8, 400, &cfg).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn fit_identical_in_both_modes() {
    let (dag, params) = reference_model().unwrap();
    let table = params.simulate(&dag, 1500, 2).unwrap();
    let fit = |execution| {
        let opts = FitOptions {
            execution,
            ..FitOptions::default()
        };
        fit_mle_with(&dag, &table, &opts).unwrap()
    };
    assert_eq!(fit(Execution::Sequential), fit(Execution::Parallel));
}

#[test]
fn kmeans_identical_in_both_modes() {
    let dir = attachnet::params::fixture_dir();
    let data = FactorTable::read_csv(std::fs::File::open(dir.join("lo_factors.csv")).unwrap()).unwrap();
    let a = kmeans_best_seed(&data, 4, 1..=300, Execution::Sequential).unwrap();
    let b = kmeans_best_seed(&data, 4, 1..=300, Execution::Parallel).unwrap();
    assert_eq!(a.best_seed, b.best_seed);
    assert_eq!(a.assignment, b.assignment);
    assert_eq!(a.total_within_ss, b.total_within_ss);
}
