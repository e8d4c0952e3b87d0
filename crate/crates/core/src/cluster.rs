//! Consensus clustering: tuples cluster together in a world when they take
//! the same value, and all absent tuples share one extra cluster.

use crate::error::{Error, Result};
use crate::genfunc::cocluster_prob;
use crate::model::{AndXorTree, TupleAlternative};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Partition of keys, stored as canonical labels: the first key is in
/// cluster 0 and each new cluster takes the next label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clustering {
    keys: Vec<String>,
    labels: Vec<usize>,
}

impl Clustering {
    /// Builds a clustering from arbitrary labels, one per key.
    pub fn from_labels<T: Eq + std::hash::Hash>(keys: Vec<String>, labels: &[T]) -> Result<Self> {
        if keys.len() != labels.len() {
            return Err(Error::Dimension {
                expected: keys.len(),
                got: labels.len(),
            });
        }
        let mut seen: HashMap<&T, usize> = HashMap::new();
        let labels = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Ok(Clustering { keys, labels })
    }

    /// Builds a clustering over `keys` from explicit clusters; every key must
    /// appear exactly once.
    pub fn from_clusters(keys: &[String], clusters: &[Vec<String>]) -> Result<Self> {
        let index: HashMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
        let mut labels = vec![None; keys.len()];
        for (c, cluster) in clusters.iter().enumerate() {
            for key in cluster {
                let i = *index.get(key.as_str()).ok_or_else(|| Error::UnknownKey(key.clone()))?;
                if labels[i].replace(c).is_some() {
                    return Err(Error::DuplicateItem(key.clone()));
                }
            }
        }
        let labels: Vec<usize> = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::BadAnswer(format!("key `{}` is in no cluster", keys[i]))))
            .collect::<Result<_>>()?;
        Clustering::from_labels(keys.to_vec(), &labels)
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn together(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    /// Clusters in label order, members in key order.
    pub fn clusters(&self) -> Vec<Vec<String>> {
        let count = self.labels.iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (k, &l) in self.keys.iter().zip(&self.labels) {
            out[l].push(k.clone());
        }
        out
    }

    /// Number of unordered pairs clustered together in exactly one of the two.
    pub fn distance(&self, other: &Clustering) -> usize {
        let n = self.labels.len();
        let mut d = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.together(i, j) != other.together(i, j) {
                    d += 1;
                }
            }
        }
        d
    }
}

/// Symmetric co-cluster probabilities over the sorted keys.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub keys: Vec<String>,
    /// `w[i][j]`; the diagonal is 1.
    pub w: Vec<Vec<f64>>,
}

pub fn pairwise_weights(tree: &AndXorTree) -> Result<Weights> {
    let keys = tree.keys().to_vec();
    let n = keys.len();
    let mut w = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = cocluster_prob(tree, &keys[i], &keys[j])?;
            w[i][j] = p;
            w[j][i] = p;
        }
    }
    Ok(Weights { keys, w })
}

/// `Σ_{together} (1 - w_ij) + Σ_{apart} w_ij`, the expected distance to the
/// random world's clustering.
pub fn clustering_cost(weights: &Weights, c: &Clustering) -> f64 {
    let n = weights.keys.len();
    let mut cost = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let w = weights.w[i][j];
            cost += if c.together(i, j) { 1.0 - w } else { w };
        }
    }
    cost
}

/// Clustering induced by one world over `keys`.
pub fn world_clustering(keys: &[String], world: &[TupleAlternative]) -> Clustering {
    let labels: Vec<Option<crate::model::Value>> = keys
        .iter()
        .map(|k| world.iter().find(|a| &a.key == k).map(|a| a.value.clone()))
        .collect();
    Clustering::from_labels(keys.to_vec(), &labels).expect("one label per key")
}

/// One randomized pivot pass: a random unclustered pivot takes every
/// remaining key with `w ≥ 0.5`.
pub fn pivot_clustering(weights: &Weights, rng: &mut ChaCha8Rng) -> Clustering {
    let n = weights.keys.len();
    let mut labels = vec![usize::MAX; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut next = 0;
    while !remaining.is_empty() {
        let p = remaining[rng.gen_range(0..remaining.len())];
        remaining.retain(|&j| {
            if j == p || weights.w[p][j] >= 0.5 {
                labels[j] = next;
                false
            } else {
                true
            }
        });
        next += 1;
    }
    Clustering::from_labels(weights.keys.clone(), &labels).expect("one label per key")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterAnswer {
    pub clustering: Clustering,
    pub expected_cost: f64,
    pub trials: usize,
}

/// Best of `trials` pivot runs under the exact linear objective.
pub fn consensus_cluster(tree: &AndXorTree, trials: usize, seed: u64) -> Result<ClusterAnswer> {
    let weights = pairwise_weights(tree)?;
    Ok(best_of_pivots(&weights, trials, seed))
}

pub fn best_of_pivots(weights: &Weights, trials: usize, seed: u64) -> ClusterAnswer {
    let trials = trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Clustering)> = None;
    for _ in 0..trials {
        let c = pivot_clustering(weights, &mut rng);
        let cost = clustering_cost(weights, &c);
        if best.as_ref().is_none_or(|(b, _)| cost < b - 1e-12) {
            best = Some((cost, c));
        }
    }
    let (expected_cost, clustering) = best.expect("at least one trial");
    ClusterAnswer {
        clustering,
        expected_cost,
        trials,
    }
}

/// All set partitions of `n` items as canonical label vectors.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(labels: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max {
            labels.push(l);
            go(labels, max.max(l + 1), n, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

/// Bell number `B(n)`, saturating.
pub fn bell_number(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().expect("nonempty")];
        for x in &row {
            next.push(next.last().expect("nonempty").saturating_add(*x));
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{from_bid, three_world_example, BidRow, Node};

    fn keys(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn deterministic_labels() {
        let tree = AndXorTree::new(Node::and(vec![
            Node::leaf("a", "x"),
            Node::leaf("b", "y"),
            Node::leaf("c", "x"),
        ]))
        .unwrap();
        let ans = consensus_cluster(&tree, 5, 3).unwrap();
        assert_eq!(
            ans.clustering.clusters(),
            vec![vec!["a".to_string(), "c".to_string()], vec!["b".to_string()]]
        );
        assert!(ans.expected_cost.abs() < 1e-12);
    }

    #[test]
    fn identical_labels_give_ones() {
        let tree = AndXorTree::new(Node::and(vec![Node::leaf("a", "x"), Node::leaf("b", "x")])).unwrap();
        assert_eq!(pairwise_weights(&tree).unwrap().w, vec![vec![1.0; 2]; 2]);
    }

    #[test]
    fn zero_weights_give_singletons() {
        let w = Weights {
            keys: keys(4),
            w: (0..4)
                .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        };
        let ans = best_of_pivots(&w, 3, 0);
        assert_eq!(ans.clustering.clusters().len(), 4);
        assert_eq!(ans.expected_cost, 0.0);
    }

    #[test]
    fn weights_match_enumeration() {
        let tree = from_bid(&[
            BidRow::new("a", "x", 0.5),
            BidRow::new("a", "y", 0.3),
            BidRow::new("b", "x", 0.2),
            BidRow::new("b", "y", 0.8),
            BidRow::new("c", "y", 0.6),
        ])
        .unwrap();
        let w = pairwise_weights(&tree).unwrap();
        let worlds = tree.enumerate_worlds(1000).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let exact: f64 = worlds
                    .iter()
                    .filter(|pw| world_clustering(&w.keys, &pw.alternatives).together(i, j))
                    .map(|pw| pw.prob)
                    .sum();
                assert!((w.w[i][j] - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cost_identity_on_example() {
        let tree = three_world_example();
        let w = pairwise_weights(&tree).unwrap();
        let worlds = tree.enumerate_worlds(10).unwrap();
        for labels in all_partitions(w.keys.len()) {
            let c = Clustering::from_labels(w.keys.clone(), &labels).unwrap();
            let exact: f64 = worlds
                .iter()
                .map(|pw| pw.prob * c.distance(&world_clustering(&w.keys, &pw.alternatives)) as f64)
                .sum();
            assert!((clustering_cost(&w, &c) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        for n in 0..=7 {
            assert_eq!(all_partitions(n).len() as u128, bell_number(n));
        }
        assert_eq!(bell_number(10), 115_975);
    }

    #[test]
    fn explicit_clusters() {
        let k = keys(3);
        let c = Clustering::from_clusters(&k, &[vec!["t2".into(), "t0".into()], vec!["t1".into()]]).unwrap();
        assert_eq!(c.labels(), &[0, 1, 0]);
        assert!(Clustering::from_clusters(&k, &[vec!["t0".into(), "t0".into()]]).is_err());
        assert!(Clustering::from_clusters(&k, &[vec!["t0".into()]]).is_err());
        assert!(Clustering::from_clusters(&k, &[vec!["zz".into()]]).is_err());
    }

    #[test]
    fn pivot_is_seeded() {
        let tree = three_world_example();
        let a = consensus_cluster(&tree, 4, 9).unwrap();
        let b = consensus_cluster(&tree, 4, 9).unwrap();
        assert_eq!(a, b);
    }
}
