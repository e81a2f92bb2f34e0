use intrafirm_core::Graph;
use intrafirm_ergm::{Covariates, ErgmModel, TermSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let p: f64 = rng.random_range(0.05..0.9);
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_edge(i, j).unwrap();
            }
        }
    }
    g
}

fn covariates(rng: &mut ChaCha8Rng, n: usize) -> Covariates {
    let mut cov = Covariates::new(n);
    cov.insert_node("x", (0..n).map(|_| rng.random_range(-5.0..5.0)).collect())
        .unwrap();
    let w: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..3.0)).collect();
    cov.insert_dyad_with("w", |i, j| w[i * n + j]).unwrap();
    cov
}

fn spec_for(kind: &str, rng: &mut ChaCha8Rng) -> TermSpec {
    match kind {
        "gwdegree" | "gwesp" | "gwdsp" => TermSpec::new(kind).decay(rng.random_range(0.0..2.5)),
        "activity" | "difference" => TermSpec::new(kind).covariate("x"),
        "edgecov" => TermSpec::new(kind).covariate("w"),
        _ => TermSpec::new(kind),
    }
}

const KINDS: [&str; 7] = [
    "edges",
    "gwdegree",
    "gwesp",
    "gwdsp",
    "activity",
    "difference",
    "edgecov",
];

fn with_edge(g: &Graph, i: usize, j: usize, on: bool) -> Graph {
    let mut h = g.clone();
    if on {
        h.add_edge(i, j).unwrap();
    } else {
        h.remove_edge(i, j);
    }
    h
}

#[test]
fn change_equals_full_difference_for_every_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in KINDS {
        for case in 0..200 {
            let n = rng.random_range(3..14);
            let g = random_graph(&mut rng, n);
            let cov = covariates(&mut rng, n);
            let model = ErgmModel::new(n, vec![spec_for(kind, &mut rng)], &cov).unwrap();
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let delta = model.change_statistics(&g, i, j).unwrap()[0];
            let on = model.statistics(&with_edge(&g, i, j, true)).unwrap()[0];
            let off = model.statistics(&with_edge(&g, i, j, false)).unwrap()[0];
            assert!(
                (delta - (on - off)).abs() <= 1e-10,
                "{kind} case {case}: change {delta} vs difference {}",
                on - off
            );
        }
    }
}

#[test]
fn zero_decay_counts_nonzero_partners() {
    // with tau = 0 every configuration with at least one partner weighs 1
    let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
    let model = ErgmModel::new(4, vec![TermSpec::new("gwesp").decay(0.0)], &Covariates::new(4)).unwrap();
    assert_eq!(model.statistics(&g).unwrap()[0], 3.0);
}

proptest! {
    #[test]
    fn toggling_is_reversible(seed in any::<u64>(), n in 3usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n);
        let cov = covariates(&mut rng, n);
        let specs: Vec<TermSpec> = KINDS.iter().map(|k| spec_for(k, &mut rng)).collect();
        let model = ErgmModel::new(n, specs, &cov).unwrap();
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let with = with_edge(&g, i, j, true);
        let without = with_edge(&g, i, j, false);
        // the change is a property of the dyad, not of its current state
        let a = model.change_statistics(&with, i, j).unwrap();
        let b = model.change_statistics(&without, i, j).unwrap();
        let z_with = model.statistics(&with).unwrap();
        let z_without = model.statistics(&without).unwrap();
        for k in 0..model.len() {
            prop_assert!((a[k] - b[k]).abs() <= 1e-10);
            // deleting reverses adding
            prop_assert!(((z_without[k] - z_with[k]) + a[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn adding_an_edge_never_lowers_gwesp(seed in any::<u64>(), n in 3usize..12, tau in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n);
        let specs = vec![TermSpec::new("edges"), TermSpec::new("gwesp").decay(tau)];
        let model = ErgmModel::new(n, specs, &Covariates::new(n)).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                let d = model.change_statistics(&g, i, j).unwrap();
                prop_assert_eq!(d[0], 1.0);
                prop_assert!(d[1] >= 0.0);
            }
        }
    }

    #[test]
    fn empty_graph_has_zero_statistics(n in 2usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cov = covariates(&mut rng, n);
        let specs: Vec<TermSpec> = KINDS.iter().map(|k| spec_for(k, &mut rng)).collect();
        let model = ErgmModel::new(n, specs, &cov).unwrap();
        prop_assert!(model.statistics(&Graph::empty(n)).unwrap().iter().all(|&z| z == 0.0));
    }
}
