//! Random instances for tests and benchmarks.

use crate::aggregate::GroupMatrix;
use crate::model::{from_bid, AndXorTree, BidRow, Node, Value};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct TreeParams {
    /// Number of leaves is drawn from `1..=max_leaves`.
    pub max_leaves: usize,
    /// Categorical values `a`, `b`, `c` instead of integer scores.
    pub labels: bool,
    /// Chance that a new leaf reuses an existing key where allowed.
    pub reuse: f64,
    /// Chance that an OR node leaves residual mass.
    pub residual: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_leaves: 12,
            labels: false,
            reuse: 0.4,
            residual: 0.5,
        }
    }
}

fn split(rng: &mut impl Rng, total: usize) -> Vec<usize> {
    let parts = rng.gen_range(2..=total.min(4));
    let mut sizes = vec![1; parts];
    for _ in parts..total {
        let i = rng.gen_range(0..parts);
        sizes[i] += 1;
    }
    sizes
}

fn or_probs(rng: &mut impl Rng, n: usize, residual: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=10) as f64).collect();
    let total = if rng.gen_bool(residual) {
        rng.gen_range(3..=9) as f64 / 10.0
    } else {
        1.0
    };
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s * total).collect()
}

fn shape(rng: &mut impl Rng, leaves: usize, p: &TreeParams) -> Node {
    if leaves == 1 {
        let leaf = Node::leaf("", 0.0);
        return if rng.gen_bool(0.5) {
            Node::or(vec![(rng.gen_range(1..=9) as f64 / 10.0, leaf)])
        } else {
            leaf
        };
    }
    let children: Vec<Node> = split(rng, leaves).into_iter().map(|n| shape(rng, n, p)).collect();
    if rng.gen_bool(0.5) {
        Node::and(children)
    } else {
        let probs = or_probs(rng, children.len(), p.residual);
        Node::or(probs.into_iter().zip(children).collect())
    }
}

/// Root paths of all leaves as `(is_or, child index)` steps.
fn leaf_paths(node: &Node, path: &mut Vec<(bool, usize)>, out: &mut Vec<Vec<(bool, usize)>>) {
    match node {
        Node::Leaf(_) => out.push(path.clone()),
        Node::And(children) => {
            for (i, c) in children.iter().enumerate() {
                path.push((false, i));
                leaf_paths(c, path, out);
                path.pop();
            }
        }
        Node::Or(children) => {
            for (i, (_, c)) in children.iter().enumerate() {
                path.push((true, i));
                leaf_paths(c, path, out);
                path.pop();
            }
        }
    }
}

fn lca_is_or(a: &[(bool, usize)], b: &[(bool, usize)]) -> bool {
    let d = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    // both leaves pass through the node at depth d, which is their LCA
    a[d].0
}

fn fill(node: &mut Node, values: &mut std::vec::IntoIter<(String, Value)>) {
    match node {
        Node::Leaf(alt) => {
            let (k, v) = values.next().expect("one value per leaf");
            alt.key = k;
            alt.value = v;
        }
        Node::And(children) => children.iter_mut().for_each(|c| fill(c, values)),
        Node::Or(children) => children.iter_mut().for_each(|(_, c)| fill(c, values)),
    }
}

/// A valid random and/xor tree with mixed AND/OR nodes.
pub fn random_tree(rng: &mut impl Rng, params: &TreeParams) -> AndXorTree {
    let leaves = rng.gen_range(1..=params.max_leaves.max(1));
    let mut root = shape(rng, leaves, params);
    if let Node::Leaf(_) = root {
        root = Node::and(vec![root]);
    }
    let mut paths = Vec::new();
    leaf_paths(&root, &mut Vec::new(), &mut paths);
    let mut keys: Vec<usize> = Vec::with_capacity(paths.len());
    let mut next = 0;
    for i in 0..paths.len() {
        let mut options: Vec<usize> = (0..next)
            .filter(|&k| {
                (0..i)
                    .filter(|&j| keys[j] == k)
                    .all(|j| lca_is_or(&paths[i], &paths[j]))
            })
            .collect();
        options.shuffle(rng);
        let key = match options.first() {
            Some(&k) if rng.gen_bool(params.reuse) => k,
            _ => {
                next += 1;
                next - 1
            }
        };
        keys.push(key);
    }
    let values: Vec<(String, Value)> = keys
        .iter()
        .map(|k| {
            let v = if params.labels {
                Value::Label(["a", "b", "c"][rng.gen_range(0..3)].to_string())
            } else {
                Value::Number(rng.gen_range(0..16) as f64)
            };
            (format!("t{k}"), v)
        })
        .collect();
    fill(&mut root, &mut values.into_iter());
    AndXorTree::new(root).expect("generated trees satisfy the constraints")
}

/// Random BID relation over `keys` keys with up to `max_alts` alternatives
/// each. Scores are distinct integers unless `labels` is set.
pub fn random_bid(rng: &mut impl Rng, keys: usize, max_alts: usize, labels: bool) -> AndXorTree {
    let mut rows = Vec::new();
    let mut score = 0.0;
    let mut scores: Vec<f64> = (0..keys * max_alts).map(|i| i as f64).collect();
    scores.shuffle(rng);
    let mut scores = scores.into_iter();
    for k in 0..keys {
        let n = rng.gen_range(1..=max_alts);
        let probs = or_probs(rng, n, 0.6);
        let mut used = Vec::new();
        for p in probs {
            let value = if labels {
                let options: Vec<&str> = ["a", "b", "c"].into_iter().filter(|l| !used.contains(l)).collect();
                let Some(&l) = options.choose(rng) else { break };
                used.push(l);
                Value::Label(l.to_string())
            } else {
                score = scores.next().unwrap_or(score + 1.0);
                Value::Number(score)
            };
            rows.push(BidRow::new(format!("t{k}"), value, p));
        }
    }
    from_bid(&rows).expect("generated rows are valid")
}

/// Random tuple-independent relation with `n` tuples.
pub fn random_independent(rng: &mut impl Rng, n: usize) -> AndXorTree {
    let rows: Vec<BidRow> = (0..n)
        .map(|i| BidRow::new(format!("t{i}"), i as f64, rng.gen_range(1..=20) as f64 / 20.0))
        .collect();
    from_bid(&rows).expect("generated rows are valid")
}

/// Random `n × m` group matrix; some entries are zero.
pub fn random_groups(rng: &mut impl Rng, n: usize, m: usize) -> GroupMatrix {
    let rows = (0..n)
        .map(|_| {
            let mut w: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(1..=10) as f64
                    }
                })
                .collect();
            if w.iter().all(|x| *x == 0.0) {
                w[rng.gen_range(0..m)] = 1.0;
            }
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    GroupMatrix::new((0..m).map(|j| format!("g{j}")).collect(), rows).expect("rows are normalized")
}
