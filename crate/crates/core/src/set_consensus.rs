//! Mean and median worlds under symmetric difference and Jaccard distance.

use crate::error::{Error, Result};
use crate::genfunc::{alternative_marginals, VariableAssignment};
use crate::model::{AndXorTree, Flat, LeafId, NodeId, TupleAlternative, PROB_TOL};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerKind {
    Mean,
    Median,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetMetric {
    SymDiff,
    Jaccard,
}

impl fmt::Display for AnswerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerKind::Mean => "mean",
            AnswerKind::Median => "median",
        })
    }
}

impl fmt::Display for SetMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetMetric::SymDiff => "symdiff",
            SetMetric::Jaccard => "jaccard",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldAnswer {
    /// Sorted alternatives of the answer.
    pub alternatives: Vec<TupleAlternative>,
    pub expected_distance: f64,
    pub kind: AnswerKind,
    pub metric: SetMetric,
    pub warnings: Vec<String>,
}

/// `E[|S Δ pw|] = Σ_{t∈S} (1 - Pr(t)) + Σ_{t∉S} Pr(t)`.
pub fn expected_symdiff(tree: &AndXorTree, set: &[TupleAlternative]) -> Result<f64> {
    let set = checked_set(tree, set)?;
    Ok(alternative_marginals(tree)
        .iter()
        .map(|(a, p)| if set.binary_search(a).is_ok() { 1.0 - p } else { *p })
        .sum())
}

fn checked_set(tree: &AndXorTree, set: &[TupleAlternative]) -> Result<Vec<TupleAlternative>> {
    let mut sorted = set.to_vec();
    sorted.sort();
    sorted.dedup();
    if let Some(a) = sorted.iter().find(|a| tree.alternatives().binary_search(a).is_err()) {
        return Err(Error::UnknownAlternative {
            key: a.key.clone(),
            value: a.value.to_string(),
        });
    }
    Ok(sorted)
}

/// Alternatives with marginal strictly above one half.
pub fn mean_world_symdiff(tree: &AndXorTree) -> WorldAnswer {
    let marginals = alternative_marginals(tree);
    let mut alternatives = Vec::new();
    let mut expected = 0.0;
    for (a, p) in marginals {
        if p > 0.5 + PROB_TOL {
            expected += 1.0 - p;
            alternatives.push(a);
        } else {
            expected += p;
        }
    }
    WorldAnswer {
        alternatives,
        expected_distance: expected,
        kind: AnswerKind::Mean,
        metric: SetMetric::SymDiff,
        warnings: Vec::new(),
    }
}

/// Possible world minimizing the expected symmetric difference.
///
/// When the mean answer is itself a world of nonzero probability it is
/// returned. Otherwise the best world is found by a tree walk maximizing
/// `Σ_{t∈pw} (2 Pr(t) - 1)` and a warning is attached.
pub fn median_world_symdiff(tree: &AndXorTree) -> WorldAnswer {
    let mean = mean_world_symdiff(tree);
    if tree.is_possible_world(&mean.alternatives) {
        return WorldAnswer {
            kind: AnswerKind::Median,
            ..mean
        };
    }
    let marginals = alternative_marginals(tree);
    let gain: Vec<f64> = tree
        .leaves()
        .iter()
        .map(|a| {
            let i = marginals.binary_search_by(|(b, _)| b.cmp(a)).expect("listed");
            2.0 * marginals[i].1 - 1.0
        })
        .collect();
    let (_, leaves) = best_world(tree, &gain, 0);
    let alternatives = tree.alternatives_of(&leaves);
    let expected_distance = expected_symdiff(tree, &alternatives).expect("alternatives come from the tree");
    WorldAnswer {
        alternatives,
        expected_distance,
        kind: AnswerKind::Median,
        metric: SetMetric::SymDiff,
        warnings: vec![format!(
            "the set of alternatives with probability above 0.5 ({} of them) is not a possible world; \
             returned the best possible world instead",
            mean.alternatives.len()
        )],
    }
}

/// Nonzero-probability world of the subtree maximizing the summed leaf gain.
/// Ties keep the earlier option, with the empty world first.
fn best_world(tree: &AndXorTree, gain: &[f64], id: NodeId) -> (f64, Vec<LeafId>) {
    match tree.flat(id) {
        Flat::Leaf(leaf) => (gain[*leaf], vec![*leaf]),
        Flat::And(children) => {
            let mut total = 0.0;
            let mut leaves = Vec::new();
            for &c in children {
                let (v, l) = best_world(tree, gain, c);
                total += v;
                leaves.extend(l);
            }
            (total, leaves)
        }
        Flat::Or { children, residual } => {
            let mut best: Option<(f64, Vec<LeafId>)> = (*residual > 0.0).then(|| (0.0, Vec::new()));
            for &(p, c) in children {
                if p <= 0.0 {
                    continue;
                }
                let cand = best_world(tree, gain, c);
                if best.as_ref().is_none_or(|(b, _)| cand.0 > *b + 1e-12) {
                    best = Some(cand);
                }
            }
            best.expect("a valid OR node has a child or residual mass")
        }
    }
}

/// Jaccard distance with `d_J(∅, ∅) = 0`.
pub fn jaccard_distance(a: &[TupleAlternative], b: &[TupleAlternative]) -> f64 {
    let union = a.len() + b.iter().filter(|x| !a.contains(x)).count();
    if union == 0 {
        return 0.0;
    }
    let inter = a.iter().filter(|x| b.contains(x)).count();
    (union - inter) as f64 / union as f64
}

/// `E[d_J(W, pw)]` from the two-variable generating function with `x` on
/// alternatives of `W` and `y` on all others: `Σ c_ij (|W| - i + j) / (|W| + j)`.
pub fn expected_jaccard(tree: &AndXorTree, set: &[TupleAlternative]) -> Result<f64> {
    let set = checked_set(tree, set)?;
    let w = set.len();
    let assign = VariableAssignment::new(tree, |_, a| Some(if set.binary_search(a).is_ok() { 0 } else { 1 }));
    let poly = crate::genfunc::evaluate(tree, &assign, &[w.max(1), tree.keys().len().max(1)])?;
    Ok(poly
        .terms()
        .map(|(e, c)| {
            let (i, j) = (e[0], e[1]);
            if w + j == 0 {
                0.0
            } else {
                c * (w - i + j) as f64 / (w + j) as f64
            }
        })
        .sum())
}

/// Scans prefixes of `order` and keeps the one with the smallest expected
/// Jaccard distance; ties go to the shorter prefix.
fn best_prefix(
    tree: &AndXorTree,
    order: &[TupleAlternative],
    allowed: impl Fn(&[TupleAlternative]) -> bool,
) -> Result<(Vec<TupleAlternative>, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for len in 0..=order.len() {
        let prefix = &order[..len];
        if !allowed(prefix) {
            continue;
        }
        let d = expected_jaccard(tree, prefix)?;
        if best.is_none_or(|(_, b)| d < b - 1e-12) {
            best = Some((len, d));
        }
    }
    let (len, d) = best.ok_or_else(|| Error::Internal("no admissible prefix".into()))?;
    let mut set = order[..len].to_vec();
    set.sort();
    Ok((set, d))
}

fn by_probability(mut items: Vec<(TupleAlternative, f64)>) -> Vec<TupleAlternative> {
    items.sort_by(|(a, p), (b, q)| q.total_cmp(p).then_with(|| a.cmp(b)));
    items.into_iter().map(|(a, _)| a).collect()
}

/// Mean world under Jaccard distance for tuple-independent relations: the
/// best prefix of the tuples sorted by decreasing probability.
pub fn mean_world_jaccard_independent(tree: &AndXorTree) -> Result<WorldAnswer> {
    if !tree.is_tuple_independent() {
        return Err(Error::WrongModel("tuple-independent"));
    }
    let order = by_probability(alternative_marginals(tree));
    let (alternatives, expected_distance) = best_prefix(tree, &order, |_| true)?;
    Ok(WorldAnswer {
        alternatives,
        expected_distance,
        kind: AnswerKind::Mean,
        metric: SetMetric::Jaccard,
        warnings: Vec::new(),
    })
}

/// Median world under Jaccard distance for BID relations: each key keeps its
/// most likely alternative and the prefix scan runs over possible worlds only.
pub fn median_world_jaccard_bid(tree: &AndXorTree) -> Result<WorldAnswer> {
    let blocks = tree.as_bid().ok_or(Error::WrongModel("a BID relation"))?;
    let mut top = Vec::new();
    for block in blocks {
        let mut best: Option<&(crate::model::Value, f64)> = None;
        for alt in &block.alternatives {
            if alt.1 > 0.0 && best.is_none_or(|b| alt.1 > b.1 || (alt.1 == b.1 && alt.0 < b.0)) {
                best = Some(alt);
            }
        }
        if let Some((v, p)) = best {
            top.push((TupleAlternative::new(block.key.clone(), v.clone()), *p));
        }
    }
    let order = by_probability(top);
    let (alternatives, expected_distance) = best_prefix(tree, &order, |prefix| {
        let mut s = prefix.to_vec();
        s.sort();
        tree.is_possible_world(&s)
    })?;
    Ok(WorldAnswer {
        alternatives,
        expected_distance,
        kind: AnswerKind::Median,
        metric: SetMetric::Jaccard,
        warnings: Vec::new(),
    })
}
