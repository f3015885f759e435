use attachnet::analytics::{communities_walktrap, pagerank};
use attachnet::compare::{kmeans_lloyd, mann_whitney_u, pca_project, pearson, FactorTable};
use attachnet::params::GaussianBnParams;
use attachnet::structure::{average_network, ArcStrengthTable};
use attachnet::Dag;
use proptest::prelude::*;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i:02}")).collect()
}

/// Random DAG over `n` nodes: arcs only go from lower to higher position in
/// a shuffled order.
fn dag_strategy(max_n: usize) -> impl Strategy<Value = (Dag, Vec<(usize, usize, f64)>)> {
    (3..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                Just(()).prop_perturb(move |_, mut rng| {
                    let mut order: Vec<usize> = (0..n).collect();
                    for i in (1..n).rev() {
                        order.swap(i, rng.random_range(0..=i));
                    }
                    order
                }),
                proptest::collection::vec(prop_oneof![Just(0.0), -1.5f64..1.5], pairs),
            )
        })
        .prop_map(|(n, order, coeffs)| {
            let mut arcs = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let c = coeffs[k];
                    k += 1;
                    if c.abs() > 0.05 {
                        arcs.push((order[i], order[j], c));
                    }
                }
            }
            let idx: Vec<(usize, usize)> = arcs.iter().map(|&(u, v, _)| (u, v)).collect();
            (Dag::from_arcs(names(n), &idx).unwrap(), arcs)
        })
}

fn params_for(dag: &Dag, arcs: &[(usize, usize, f64)], scale: f64) -> GaussianBnParams {
    let scaled: Vec<(usize, usize, f64)> = arcs.iter().map(|&(u, v, c)| (u, v, c * scale)).collect();
    let n = dag.len();
    GaussianBnParams::from_arcs(dag, vec![0.0; n], vec![1.0; n], &scaled).unwrap()
}

fn strength_table(n: usize, cells: &[(f64, f64)]) -> ArcStrengthTable {
    let mut t = ArcStrengthTable::new(names(n));
    let mut k = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            let (s, d) = cells[k];
            k += 1;
            t.set(u, v, s, d);
        }
    }
    t
}

fn table_strategy() -> impl Strategy<Value = (usize, Vec<(f64, f64)>)> {
    (3usize..9).prop_flat_map(|n| {
        let cell = (prop_oneof![Just(0.0), 0.0f64..=1.0], prop_oneof![Just(0.5), 0.0f64..=1.0]);
        (Just(n), proptest::collection::vec(cell, n * (n - 1) / 2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn averaged_network_is_acyclic_and_monotone((n, cells) in table_strategy(), lo in 0.05f64..0.9, gap in 0.0f64..0.5) {
        let t = strength_table(n, &cells);
        let hi = (lo + gap).min(1.0);
        let a = average_network(&t, lo).unwrap();
        let b = average_network(&t, hi).unwrap();
        prop_assert_eq!(a.dag.topological_order().len(), n);
        for (u, v) in b.dag.arcs() {
            prop_assert!(a.dag.has_arc(u, v), "{u}->{v} appears only at the higher threshold");
        }
        for (u, v) in a.dag.arcs() {
            prop_assert!(t.strength(u, v) >= lo);
            prop_assert!(t.direction(u, v) > 0.5);
        }
    }

    #[test]
    fn walktrap_ignores_coefficient_sign((dag, w) in dag_strategy(12)) {
        prop_assume!(dag.arc_count() > 0);
        let p = params_for(&dag, &w, 1.0);
        let flipped = params_for(&dag, &w, -1.0);
        let a = communities_walktrap(&dag, &p, 4).unwrap();
        let b = communities_walktrap(&dag, &flipped, 4).unwrap();
        prop_assert!(a.same_grouping(&b));
    }

    #[test]
    fn pagerank_is_a_distribution_and_scale_free((dag, w) in dag_strategy(12), scale in 0.1f64..10.0) {
        let p = params_for(&dag, &w, 1.0);
        let q = params_for(&dag, &w, scale);
        let a = pagerank(&dag, &p, 0.85).unwrap();
        let b = pagerank(&dag, &q, 0.85).unwrap();
        let total: f64 = a.values.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(*x >= 0.0);
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn kmeans_trace_never_increases_and_ignores_translation(
        rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 2), 8..30),
        shift in proptest::collection::vec(-100.0f64..100.0, 2),
        seed in 0u64..50,
    ) {
        let items = names(rows.len());
        let data = FactorTable::new(items.clone(), rows.clone()).unwrap();
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] + shift[0], r[1] + shift[1]]).collect();
        let moved = FactorTable::new(items, moved).unwrap();
        let (a, trace) = kmeans_lloyd(&data, 3, seed).unwrap();
        let (b, _) = kmeans_lloyd(&moved, 3, seed).unwrap();
        for pair in trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + 1e-12) + 1e-12);
        }
        prop_assert!(a.partition().same_grouping(&b.partition()));
        prop_assert!((a.total_within_ss - b.total_within_ss).abs() < 1e-6 * (1.0 + a.total_within_ss));
    }

    #[test]
    fn pca_scores_are_uncorrelated(
        rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 3), 6..25),
    ) {
        let data = FactorTable::new(names(rows.len()), rows).unwrap();
        let proj = pca_project(&data, 2).unwrap();
        let s = &proj.scores;
        let mean = |j: usize| (0..s.len()).map(|i| s.row(i)[j]).sum::<f64>() / s.len() as f64;
        let (m0, m1) = (mean(0), mean(1));
        let cov: f64 = (0..s.len()).map(|i| (s.row(i)[0] - m0) * (s.row(i)[1] - m1)).sum();
        let scale: f64 = (0..s.len()).map(|i| s.row(i)[0].powi(2) + s.row(i)[1].powi(2)).sum();
        prop_assert!(m0.abs() < 1e-9 && m1.abs() < 1e-9);
        prop_assert!(cov.abs() <= 1e-8 * (1.0 + scale));
        prop_assert!(proj.explained[0] + 1e-12 >= proj.explained[1]);
    }

    #[test]
    fn mann_whitney_invariant_under_monotone_maps(
        a in proptest::collection::vec(-10.0f64..10.0, 2..15),
        b in proptest::collection::vec(-10.0f64..10.0, 2..15),
    ) {
        let f = |x: &f64| x.powi(3) + 2.0 * x;
        let ta: Vec<f64> = a.iter().map(f).collect();
        let tb: Vec<f64> = b.iter().map(f).collect();
        let x = mann_whitney_u(&a, &b).unwrap();
        let y = mann_whitney_u(&ta, &tb).unwrap();
        prop_assert_eq!(x.u, y.u);
        prop_assert!((x.p - y.p).abs() < 1e-12);
        prop_assert!(x.p > 0.0 && x.p <= 1.0);
    }

    #[test]
    fn pearson_is_symmetric_and_bounded(
        xy in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let (Ok(r1), Ok(r2)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((r1 - r2).abs() < 1e-12);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r1));
        }
    }
}
