use consensusdb::generate::{random_tree, TreeParams};
use consensusdb::AndXorTree;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn tree(seed: u64) -> AndXorTree {
    random_tree(&mut ChaCha8Rng::seed_from_u64(seed), &TreeParams::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn world_probabilities_sum_to_one(seed in any::<u64>()) {
        let worlds = tree(seed).enumerate_worlds(1 << 20).unwrap();
        let total: f64 = worlds.iter().map(|w| w.prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn marginals_match_enumeration(seed in any::<u64>()) {
        let t = tree(seed);
        let worlds = t.enumerate_worlds(1 << 20).unwrap();
        for alt in t.alternatives() {
            let exact: f64 = worlds.iter().filter(|w| w.contains(alt)).map(|w| w.prob).sum();
            prop_assert!((t.marginal(alt).unwrap() - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn worlds_are_distinct_and_keyed(seed in any::<u64>()) {
        let t = tree(seed);
        let worlds = t.enumerate_worlds(1 << 20).unwrap();
        let mut seen = BTreeSet::new();
        for w in &worlds {
            prop_assert!(w.prob > 0.0);
            prop_assert!(seen.insert(w.alternatives.clone()));
            let keys: BTreeSet<&str> = w.alternatives.iter().map(|a| a.key.as_str()).collect();
            prop_assert_eq!(keys.len(), w.len());
            prop_assert!(t.is_possible_world(&w.alternatives));
        }
    }

    #[test]
    fn samples_respect_the_key_constraint(seed in any::<u64>()) {
        let t = tree(seed);
        for s in 0..20 {
            let w = t.sample_world(seed ^ s);
            let keys: BTreeSet<&str> = w.alternatives.iter().map(|a| a.key.as_str()).collect();
            prop_assert_eq!(keys.len(), w.len());
            prop_assert!(t.is_possible_world(&w.alternatives));
        }
    }
}

#[test]
fn sampled_marginals_converge() {
    let t = tree(77);
    let samples = 20_000;
    for alt in t.alternatives() {
        let p = t.marginal(alt).unwrap();
        let hits = (0..samples).filter(|&s| t.sample_world(s).contains(alt)).count();
        let freq = hits as f64 / samples as f64;
        let sd = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((freq - p).abs() <= 5.0 * sd + 1e-12, "{alt:?}: {freq} vs {p}");
    }
}
