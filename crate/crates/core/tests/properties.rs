mod common;

use levy_tree::estimate::chi_hat;
use levy_tree::learn::{minimum_spanning_tree, mst};
use levy_tree::measures::{all_sign_vectors, hr_gamma_to_theta, OrthantWeights, Sign};
use levy_tree::simulate::IncrementMatrix;
use levy_tree::tree::{random_tree, tree_metric_complete, EdgeMap, TreeTopology};
use levy_tree::linalg;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn heavy_columns(seed: u64, n: usize, d: usize) -> IncrementMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let common: f64 = 1.0 / rng.random::<f64>() * if rng.random::<bool>() { 1.0 } else { -1.0 };
        rows.push(
            (0..d)
                .map(|_| {
                    let own = 1.0 / rng.random::<f64>() * if rng.random::<bool>() { 1.0 } else { -1.0 };
                    if rng.random::<f64>() < 0.5 { common } else { own }
                })
                .collect(),
        );
    }
    IncrementMatrix::from_rows(&rows).unwrap()
}

fn random_weights(seed: u64, d: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let v: f64 = rng.random();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

fn total(w: &DMatrix<f64>, t: &TreeTopology) -> f64 {
    t.edges().iter().map(|e| w[(e.a, e.b)]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chi_hat_is_rank_invariant(seed in any::<u64>(), k in 5usize..60) {
        let inc = heavy_columns(seed, 200, 3);
        let est = chi_hat(&inc, k).unwrap();
        let moved = inc.map_columns(|j, x| match j {
            0 => x.powi(3) + 2.0 * x,
            1 => 3.0 * x - 7.0,
            _ => x.atan(),
        }).unwrap();
        prop_assert_eq!(chi_hat(&moved, k).unwrap().chi, est.chi);
    }

    #[test]
    fn chi_hat_orthant_split_adds_up(seed in any::<u64>(), k in 1usize..80) {
        let inc = heavy_columns(seed, 150, 4);
        let est = chi_hat(&inc, k).unwrap();
        let sum = &est.chi_pp + &est.chi_pm + &est.chi_mp + &est.chi_mm;
        prop_assert!((sum - &est.chi).abs().max() < 1e-14);
        for i in 0..4 {
            prop_assert_eq!(est.chi[(i, i)], 1.0);
            for j in 0..4 {
                prop_assert_eq!(est.chi[(i, j)], est.chi[(j, i)]);
                prop_assert_eq!(est.chi_pm[(i, j)], est.chi_mp[(j, i)]);
            }
        }
    }

    #[test]
    fn chi_hat_is_permutation_equivariant(seed in any::<u64>()) {
        let inc = heavy_columns(seed, 120, 4);
        let perm = [2usize, 0, 3, 1];
        let cols: Vec<Vec<f64>> = perm.iter().map(|&j| inc.column(j)).collect();
        let permuted = IncrementMatrix::from_columns(&cols).unwrap();
        let a = chi_hat(&inc, 20).unwrap().chi;
        let b = chi_hat(&permuted, 20).unwrap().chi;
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(b[(i, j)], a[(perm[i], perm[j])]);
            }
        }
    }

    #[test]
    fn orthant_weights_sum_to_two(seed in any::<u64>(), d in 2usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(d, &mut rng).unwrap();
        let m: Vec<f64> = (0..d.saturating_sub(1)).map(|_| rng.random()).collect();
        let w = OrthantWeights::from_values(&t, m).unwrap();
        let total: f64 = all_sign_vectors(d).map(|s| w.weight(&s).unwrap()).sum();
        prop_assert!((total - 2.0).abs() < 1e-12);
        // Flipping every sign leaves the weight unchanged.
        for s in all_sign_vectors(d).take(64) {
            let flipped: Vec<Sign> = s.iter().map(|x| x.flip()).collect();
            prop_assert!((w.weight(&s).unwrap() - w.weight(&flipped).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn tree_metrics_satisfy_four_points(seed in any::<u64>(), d in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(d, &mut rng).unwrap();
        let g: EdgeMap<f64> = t.edges().iter().map(|&e| (e, rng.random_range(0.1..5.0))).collect();
        let full = tree_metric_complete(&t, &g).unwrap();
        prop_assert!(common::four_point_holds(&full, 1e-9));
        let theta = hr_gamma_to_theta(&full).unwrap();
        prop_assert!(theta.column_sum().abs().max() < 1e-9);
        prop_assert!(linalg::min_eigenvalue(&theta) > -1e-9);
    }

    #[test]
    fn mst_is_invariant_under_relabeling(seed in any::<u64>(), d in 2usize..=9) {
        let w = random_weights(seed, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        // w'[(perm[i], perm[j])] = w[(i, j)]
        let mut wp = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                wp[(perm[i], perm[j])] = w[(i, j)];
            }
        }
        let t = mst(&w).unwrap();
        prop_assert_eq!(mst(&wp).unwrap(), t.relabel(&perm).unwrap());
    }
}

#[test]
fn mst_matches_enumeration() {
    for d in 2..=7 {
        let trees = common::all_spanning_trees(d);
        // Cayley's formula.
        assert_eq!(trees.len(), (d as u64).pow(d as u32 - 2) as usize);
        for seed in 0..8 {
            let w = random_weights(100 * d as u64 + seed, d);
            let best = trees
                .iter()
                .map(|t| TreeTopology::new(d, t.iter().copied()).unwrap())
                .min_by(|a, b| total(&w, a).total_cmp(&total(&w, b)))
                .unwrap();
            let found = minimum_spanning_tree(&w).unwrap();
            assert!(!found.ambiguous);
            assert_eq!(found.tree, best);
        }
    }
}

#[test]
fn tied_weights_are_flagged() {
    let w = DMatrix::from_element(4, 4, 1.0);
    let found = minimum_spanning_tree(&w).unwrap();
    assert!(found.ambiguous);
    assert_eq!(found.tree, TreeTopology::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap());
}
