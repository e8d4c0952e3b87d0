use consensusdb::generate::{random_bid, random_independent, random_tree, TreeParams};
use consensusdb::set_consensus::{
    expected_jaccard, expected_symdiff, jaccard_distance, mean_world_jaccard_independent, median_world_jaccard_bid,
    median_world_symdiff,
};
use consensusdb::{AndXorTree, TupleAlternative};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exact_jaccard(tree: &AndXorTree, set: &[TupleAlternative]) -> f64 {
    tree.enumerate_worlds(1 << 20)
        .unwrap()
        .iter()
        .map(|w| w.prob * jaccard_distance(set, &w.alternatives))
        .sum()
}

/// All subsets of `alts` by bitmask, with their expected Jaccard distance.
fn jaccard_argmin(tree: &AndXorTree) -> (f64, Vec<TupleAlternative>) {
    let alts = tree.alternatives();
    (0..1usize << alts.len())
        .map(|mask| {
            let s: Vec<TupleAlternative> = alts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect();
            (exact_jaccard(tree, &s), s)
        })
        .fold(
            (f64::INFINITY, Vec::new()),
            |best, c| if c.0 < best.0 - 1e-12 { c } else { best },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn median_symdiff_is_best_world(seed in any::<u64>()) {
        let t = random_tree(&mut rng(seed), &TreeParams::default());
        let ans = median_world_symdiff(&t);
        let worlds = t.enumerate_worlds(1 << 20).unwrap();
        prop_assert!(worlds.iter().any(|w| w.alternatives == ans.alternatives));
        for w in &worlds {
            prop_assert!(ans.expected_distance <= expected_symdiff(&t, &w.alternatives).unwrap() + 1e-9);
        }
    }

    #[test]
    fn expected_jaccard_matches_enumeration(seed in any::<u64>(), mask in any::<u64>()) {
        let t = random_tree(&mut rng(seed), &TreeParams::default());
        let set: Vec<TupleAlternative> = t.alternatives().iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, a)| a.clone()).collect();
        prop_assert!((expected_jaccard(&t, &set).unwrap() - exact_jaccard(&t, &set)).abs() < 1e-9);
    }

    #[test]
    fn independent_jaccard_optimum_is_a_probability_prefix(seed in any::<u64>(), n in 1usize..=8) {
        let t = random_independent(&mut rng(seed), n);
        let (value, best) = jaccard_argmin(&t);
        let p = |a: &TupleAlternative| t.marginal(a).unwrap();
        let min_in = best.iter().map(p).fold(f64::INFINITY, f64::min);
        let max_out = t.alternatives().iter().filter(|a| !best.contains(a)).map(p).fold(0.0, f64::max);
        prop_assert!(best.is_empty() || min_in >= max_out - 1e-12);
        let ans = mean_world_jaccard_independent(&t).unwrap();
        prop_assert!((ans.expected_distance - value).abs() < 1e-9);
    }

    #[test]
    fn bid_jaccard_median_is_a_world(seed in any::<u64>(), n in 1usize..=5) {
        let t = random_bid(&mut rng(seed), n, 3, false);
        let ans = median_world_jaccard_bid(&t).unwrap();
        prop_assert!(t.is_possible_world(&ans.alternatives));
        prop_assert!((ans.expected_distance - exact_jaccard(&t, &ans.alternatives)).abs() < 1e-9);
    }
}

#[test]
fn jaccard_of_two_empty_sets_is_zero() {
    assert_eq!(jaccard_distance(&[], &[]), 0.0);
    let a = [TupleAlternative::new("a", 1.0)];
    assert_eq!(jaccard_distance(&a, &[]), 1.0);
}

#[test]
fn jaccard_mean_needs_independence() {
    let t = random_bid(&mut rng(3), 3, 3, false);
    if !t.is_tuple_independent() {
        assert!(mean_world_jaccard_independent(&t).is_err());
    }
}
