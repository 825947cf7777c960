mod common;

use nalgebra::DMatrix;
use netmon::hclust::parse_newick;
use netmon::treedist::{
    clustering_info_distance, extract_splits, optimal_matching_score, pairing_scores, rf_distance,
    tree_distance_series, Split, TreeMetric,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn shuffled_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut l = labels(n);
    l.shuffle(rng);
    l
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rf_matches_brute_force(seed in any::<u64>(), n in 3usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_tree(&mut rng, n), random_tree(&mut rng, n));
        let d = rf_distance(&a, &b).unwrap();
        prop_assert_eq!(d, brute_rf(&a, &b));
        prop_assert_eq!(d, rf_distance(&b, &a).unwrap());
        prop_assert_eq!(rf_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn cid_matches_brute_force(seed in any::<u64>(), n in 4usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_tree(&mut rng, n), random_tree(&mut rng, n));
        let d = clustering_info_distance(&a, &b).unwrap();
        prop_assert!((d - brute_cid(&a, &b)).abs() < 1e-10);
        prop_assert!((d - clustering_info_distance(&b, &a).unwrap()).abs() < 1e-10);
        prop_assert!(d >= 0.0);
        prop_assert!(clustering_info_distance(&a, &a).unwrap().abs() < 1e-10);
    }

    #[test]
    fn distances_ignore_leaf_storage_order(seed in any::<u64>(), n in 4usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_tree(&mut rng, n), random_tree(&mut rng, n));
        let b2 = b.reorder_leaves(&shuffled_labels(&mut rng, n)).unwrap();
        prop_assert_eq!(rf_distance(&a, &b).unwrap(), rf_distance(&a, &b2).unwrap());
        let (c1, c2) = (clustering_info_distance(&a, &b).unwrap(), clustering_info_distance(&a, &b2).unwrap());
        prop_assert!((c1 - c2).abs() < 1e-10);
    }

    #[test]
    fn matching_matches_enumeration(seed in any::<u64>(), r in 0usize..7, c in 0usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = DMatrix::from_fn(r, c, |_, _| rng.random::<f64>());
        prop_assert!((optimal_matching_score(&s) - brute_matching(&s)).abs() < 1e-10);
    }
}

#[test]
fn tree_split_matching_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let a = extract_splits(&random_tree(&mut rng, 8));
        let b = extract_splits(&random_tree(&mut rng, 8));
        let s = pairing_scores(&a, &b);
        assert!((optimal_matching_score(&s) - brute_matching(&s)).abs() < 1e-10);
    }
}

#[test]
fn even_four_leaf_split_carries_one_bit() {
    let s = Split::from_members(&[0, 1], 4).unwrap();
    assert!((s.entropy() - 1.0).abs() < 1e-12);
    assert!(Split::from_members(&[0], 4).is_none());
    assert!(Split::from_members(&[0, 1, 2], 4).is_none());
}

#[test]
fn different_leaf_sets_are_rejected() {
    let a = parse_newick("((a:1,b:1):1,c:2);").unwrap();
    let b = parse_newick("((a:1,b:1):1,d:2);").unwrap();
    assert!(rf_distance(&a, &b).is_err());
    assert!(clustering_info_distance(&a, &b).is_err());
}

#[test]
fn series_pairs_consecutive_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = dates(5);
    let trees: Vec<_> = d.iter().map(|&x| (x, random_tree(&mut rng, 7))).collect();
    let s = tree_distance_series(&trees, TreeMetric::Rf, "PCCD").unwrap();
    assert_eq!(s.timestamps, d[1..].to_vec());
    for (k, v) in s.values.iter().enumerate() {
        assert_eq!(*v, brute_rf(&trees[k].1, &trees[k + 1].1));
    }
}
