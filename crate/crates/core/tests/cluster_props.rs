use consensusdb::cluster::{best_of_pivots, clustering_cost, consensus_cluster, pairwise_weights, pivot_clustering};
use consensusdb::generate::{random_bid, random_tree, TreeParams};
use consensusdb::AndXorTree;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree(seed: u64) -> AndXorTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed.is_multiple_of(2) {
        random_tree(
            &mut rng,
            &TreeParams {
                labels: true,
                ..TreeParams::default()
            },
        )
    } else {
        random_bid(&mut rng, 6, 3, true)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_symmetric_probabilities(seed in any::<u64>()) {
        let w = pairwise_weights(&tree(seed)).unwrap();
        for i in 0..w.keys.len() {
            prop_assert_eq!(w.w[i][i], 1.0);
            for j in 0..w.keys.len() {
                prop_assert_eq!(w.w[i][j], w.w[j][i]);
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&w.w[i][j]));
            }
        }
    }

    #[test]
    fn pivot_gives_a_partition(seed in any::<u64>()) {
        let w = pairwise_weights(&tree(seed)).unwrap();
        let c = pivot_clustering(&w, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut members: Vec<String> = c.clusters().concat();
        members.sort();
        prop_assert_eq!(&members, &w.keys);
        prop_assert!(c.clusters().iter().all(|cl| !cl.is_empty()));
    }

    #[test]
    fn best_of_pivots_is_seeded_and_improves(seed in any::<u64>()) {
        let t = tree(seed);
        let a = consensus_cluster(&t, 10, seed).unwrap();
        prop_assert_eq!(&a, &consensus_cluster(&t, 10, seed).unwrap());
        let w = pairwise_weights(&t).unwrap();
        prop_assert!((clustering_cost(&w, &a.clustering) - a.expected_cost).abs() < 1e-12);
        let one = best_of_pivots(&w, 1, seed);
        prop_assert!(a.expected_cost <= one.expected_cost + 1e-12);
    }
}
