//! Top-k distance metrics and consensus top-k answers.
//!
//! Positions are 1-based. Lists may be shorter than `k` when a world holds
//! fewer than `k` tuples; missing items sit at position `k + 1` for the
//! footrule and are simply absent for the other metrics.

use crate::error::{Error, Result};
use crate::genfunc::{precedes_prob, rank_profiles, RankProfile};
use crate::model::{rank_cmp, AndXorTree, Flat, LeafId, NodeId, TupleAlternative};
use crate::solvers::{solve_assignment, AssignmentInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

/// World count up to which expected Kendall distances are computed exactly.
pub const KENDALL_EXACT_WORLDS: usize = 5000;
/// Samples drawn when the Kendall expectation is estimated.
pub const KENDALL_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TopKMetric {
    SymDiff,
    Intersection,
    Footrule,
    Kendall,
}

impl TopKMetric {
    pub const ALL: [TopKMetric; 4] = [
        TopKMetric::SymDiff,
        TopKMetric::Intersection,
        TopKMetric::Footrule,
        TopKMetric::Kendall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopKMetric::SymDiff => "symdiff",
            TopKMetric::Intersection => "intersection",
            TopKMetric::Footrule => "footrule",
            TopKMetric::Kendall => "kendall",
        }
    }
}

impl fmt::Display for TopKMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopKMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopKMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::MetricMismatch {
                metric: s.to_string(),
                query: "top-k".to_string(),
            })
    }
}

/// Ordered list of at most `k` distinct keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopKList {
    pub items: Vec<String>,
    pub k: usize,
}

impl TopKList {
    pub fn new(items: Vec<String>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if items.len() > k {
            return Err(Error::MismatchedK {
                k,
                left: items.len(),
                right: items.len(),
            });
        }
        let mut seen = HashSet::new();
        for item in &items {
            if !seen.insert(item.as_str()) {
                return Err(Error::DuplicateItem(item.clone()));
            }
        }
        Ok(TopKList { items, k })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Distance between two top-k lists of the same `k`.
pub fn dist_topk(a: &TopKList, b: &TopKList, metric: TopKMetric) -> Result<f64> {
    if a.k != b.k {
        return Err(Error::MismatchedK {
            k: a.k,
            left: a.k,
            right: b.k,
        });
    }
    Ok(distance(&a.items, &b.items, a.k, metric))
}

pub(crate) fn distance(a: &[String], b: &[String], k: usize, metric: TopKMetric) -> f64 {
    match metric {
        TopKMetric::SymDiff => symdiff_count(a, b) as f64 / (2 * k) as f64,
        TopKMetric::Intersection => {
            let total: f64 = (1..=k)
                .map(|i| symdiff_count(&a[..i.min(a.len())], &b[..i.min(b.len())]) as f64 / (2 * i) as f64)
                .sum();
            total / k as f64
        }
        TopKMetric::Footrule => {
            let pa = positions(a);
            let pb = positions(b);
            let missing = k + 1;
            let mut total = 0;
            for t in pa.keys().chain(pb.keys().filter(|t| !pa.contains_key(*t))) {
                let x = pa.get(t).copied().unwrap_or(missing);
                let y = pb.get(t).copied().unwrap_or(missing);
                total += x.abs_diff(y);
            }
            total as f64
        }
        TopKMetric::Kendall => {
            let pa = positions(a);
            let pb = positions(b);
            let mut items: Vec<&str> = a.iter().map(String::as_str).collect();
            items.extend(b.iter().map(String::as_str).filter(|t| !pa.contains_key(t)));
            let mut count = 0;
            for (x, i) in items.iter().enumerate() {
                for j in &items[x + 1..] {
                    count += kendall_penalty(
                        (pa.get(i).copied(), pa.get(j).copied()),
                        (pb.get(i).copied(), pb.get(j).copied()),
                    );
                }
            }
            count as f64
        }
    }
}

fn positions(list: &[String]) -> HashMap<&str, usize> {
    list.iter().enumerate().map(|(i, t)| (t.as_str(), i + 1)).collect()
}

fn symdiff_count(a: &[String], b: &[String]) -> usize {
    let common = a.iter().filter(|t| b.contains(t)).count();
    a.len() + b.len() - 2 * common
}

/// Penalty of one unordered pair under `K^(0)`, given the positions of the
/// two items in each list.
fn kendall_penalty(a: (Option<usize>, Option<usize>), b: (Option<usize>, Option<usize>)) -> usize {
    // `Some(true)` when the first item is known to precede the second
    fn order(p: (Option<usize>, Option<usize>)) -> Option<bool> {
        match p {
            (Some(x), Some(y)) => Some(x < y),
            (Some(_), None) => Some(true),
            (None, Some(_)) => Some(false),
            (None, None) => None,
        }
    }
    match (order(a), order(b)) {
        (Some(x), Some(y)) => usize::from(x != y),
        _ => 0,
    }
}

/// A consensus top-k answer with its expected distance to the random
/// world's top-k list.
#[derive(Clone, Debug, PartialEq)]
pub struct TopKAnswer {
    pub items: Vec<String>,
    pub k: usize,
    pub metric: TopKMetric,
    pub expected_distance: f64,
    /// The answer has fewer than `k` items.
    pub short: bool,
    pub method: String,
}

impl TopKAnswer {
    pub fn list(&self) -> TopKList {
        TopKList {
            items: self.items.clone(),
            k: self.k,
        }
    }
}

fn require_keys(tree: &AndXorTree, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if tree.keys().len() < k {
        return Err(Error::NotEnoughKeys {
            needed: k,
            available: tree.keys().len(),
        });
    }
    Ok(())
}

fn profile_map(profiles: &[RankProfile]) -> HashMap<&str, &RankProfile> {
    profiles.iter().map(|p| (p.key.as_str(), p)).collect()
}

/// `E[d_Δ(τ, τ_pw)] = (|τ| + Σ_t Pr(r(t) ≤ k) - 2 Σ_{t∈τ} Pr(r(t) ≤ k)) / 2k`.
pub fn expected_symdiff(profiles: &[RankProfile], items: &[String], k: usize) -> f64 {
    let map = profile_map(profiles);
    let all: f64 = profiles.iter().map(|p| p.upsilon1).sum();
    let chosen: f64 = items.iter().map(|t| map[t.as_str()].upsilon1).sum();
    (items.len() as f64 + all - 2.0 * chosen) / (2 * k) as f64
}

/// `A(τ) = Σ_i (1/i) Σ_{t∈τ^i} Pr(r(t) ≤ i)`.
pub fn intersection_score(profiles: &[RankProfile], items: &[String], k: usize) -> f64 {
    let map = profile_map(profiles);
    (1..=k)
        .map(|i| {
            items
                .iter()
                .take(i)
                .map(|t| map[t.as_str()].rank_at_most(i))
                .sum::<f64>()
                / i as f64
        })
        .sum()
}

/// `E[d_I(τ, τ_pw)]`, expanded prefix by prefix.
pub fn expected_intersection(profiles: &[RankProfile], items: &[String], k: usize) -> f64 {
    let map = profile_map(profiles);
    let total: f64 = (1..=k)
        .map(|i| {
            let all: f64 = profiles.iter().map(|p| p.rank_at_most(i)).sum();
            let chosen: f64 = items.iter().take(i).map(|t| map[t.as_str()].rank_at_most(i)).sum();
            (i.min(items.len()) as f64 + all - 2.0 * chosen) / (2 * i) as f64
        })
        .sum();
    total / k as f64
}

/// Assignment cost of putting `t` at position `i` under the footrule.
fn footrule_cost(p: &RankProfile, i: usize) -> f64 {
    p.upsilon3[i - 1] + p.upsilon2 - 2.0 * (p.k + 1) as f64 * p.upsilon1
}

/// `E[d_F(τ, τ_pw)]` for a list of exactly `k` items.
pub fn expected_footrule(profiles: &[RankProfile], items: &[String], k: usize) -> f64 {
    let map = profile_map(profiles);
    let constant: f64 = (k * (k + 1)) as f64
        + profiles
            .iter()
            .map(|p| (k + 1) as f64 * p.upsilon1 - p.upsilon2)
            .sum::<f64>();
    constant
        + items
            .iter()
            .enumerate()
            .map(|(i, t)| footrule_cost(map[t.as_str()], i + 1))
            .sum::<f64>()
}

fn answer(items: Vec<String>, k: usize, metric: TopKMetric, expected: f64, method: &str) -> TopKAnswer {
    TopKAnswer {
        short: items.len() < k,
        items,
        k,
        metric,
        expected_distance: expected,
        method: method.to_string(),
    }
}

/// Keys sorted by decreasing `score`, ties by key, first `k` kept.
fn top_by(profiles: &[RankProfile], k: usize, score: impl Fn(&RankProfile) -> f64) -> Vec<String> {
    let mut order: Vec<&RankProfile> = profiles.iter().collect();
    order.sort_by(|a, b| score(b).total_cmp(&score(a)).then_with(|| a.key.cmp(&b.key)));
    order.into_iter().take(k).map(|p| p.key.clone()).collect()
}

/// Mean answer under `d_Δ`: the `k` keys with the largest `Pr(r(t) ≤ k)`.
pub fn mean_topk_symdiff(tree: &AndXorTree, k: usize) -> Result<TopKAnswer> {
    require_keys(tree, k)?;
    let profiles = rank_profiles(tree, k)?;
    let items = top_by(&profiles, k, |p| p.upsilon1);
    let d = expected_symdiff(&profiles, &items, k);
    Ok(answer(items, k, TopKMetric::SymDiff, d, "pt-k"))
}

/// Mean answer under `d_I`, by assignment with profit
/// `Σ_{i=j}^k Pr(r(t) ≤ i) / i` for key `t` at position `j`.
pub fn mean_topk_intersection(tree: &AndXorTree, k: usize) -> Result<TopKAnswer> {
    require_keys(tree, k)?;
    let profiles = rank_profiles(tree, k)?;
    let profit = profiles
        .iter()
        .map(|p| {
            (1..=k)
                .map(|j| (j..=k).map(|i| p.rank_at_most(i) / i as f64).sum())
                .collect()
        })
        .collect();
    let sol = solve_assignment(&AssignmentInstance::new(profit, k)?)?;
    let items: Vec<String> = sol.matching.iter().map(|&a| profiles[a].key.clone()).collect();
    let d = expected_intersection(&profiles, &items, k);
    Ok(answer(items, k, TopKMetric::Intersection, d, "assignment"))
}

/// The `k` keys with the largest `Υ_H(t) = Σ_{i≤k} Pr(r(t) ≤ i) / i`.
/// Guarantees `A(τ_H) ≥ A(τ*) / H_k`.
pub fn approx_topk_intersection_upsilon_h(tree: &AndXorTree, k: usize) -> Result<TopKAnswer> {
    require_keys(tree, k)?;
    let profiles = rank_profiles(tree, k)?;
    let items = top_by(&profiles, k, |p| p.upsilon_h);
    let d = expected_intersection(&profiles, &items, k);
    Ok(answer(items, k, TopKMetric::Intersection, d, "upsilon-h"))
}

/// Mean answer under the footrule, by assignment on
/// `f(t, i) = Υ3(t, i) + Υ2(t) - 2(k+1)Υ1(t)`.
pub fn mean_topk_footrule(tree: &AndXorTree, k: usize) -> Result<TopKAnswer> {
    require_keys(tree, k)?;
    let profiles = rank_profiles(tree, k)?;
    footrule_answer(&profiles, k)
}

fn footrule_answer(profiles: &[RankProfile], k: usize) -> Result<TopKAnswer> {
    let profit = profiles
        .iter()
        .map(|p| (1..=k).map(|i| -footrule_cost(p, i)).collect())
        .collect();
    let sol = solve_assignment(&AssignmentInstance::new(profit, k)?)?;
    let items: Vec<String> = sol.matching.iter().map(|&a| profiles[a].key.clone()).collect();
    let d = expected_footrule(profiles, &items, k);
    Ok(answer(items, k, TopKMetric::Footrule, d, "assignment"))
}

/// Best of sized worlds for one subtree: `table[i]` holds the largest gain
/// of a nonzero-probability world with exactly `i` kept leaves.
type Table = Vec<Option<(f64, Vec<LeafId>)>>;

fn better(cand: f64, current: &Option<(f64, Vec<LeafId>)>) -> bool {
    current.as_ref().is_none_or(|(b, _)| cand > *b + 1e-12)
}

fn sized_worlds(tree: &AndXorTree, id: NodeId, keep: &[bool], gain: &[f64], k: usize) -> Table {
    let mut table: Table = vec![None; k + 1];
    match tree.flat(id) {
        Flat::Leaf(leaf) => {
            if keep[*leaf] {
                table[1] = Some((gain[*leaf], vec![*leaf]));
            } else {
                table[0] = Some((0.0, Vec::new()));
            }
        }
        Flat::Or { children, residual } => {
            if *residual > 0.0 {
                table[0] = Some((0.0, Vec::new()));
            }
            for &(p, c) in children {
                if p <= 0.0 {
                    continue;
                }
                for (i, entry) in sized_worlds(tree, c, keep, gain, k).into_iter().enumerate() {
                    if let Some((v, leaves)) = entry {
                        if better(v, &table[i]) {
                            table[i] = Some((v, leaves));
                        }
                    }
                }
            }
        }
        Flat::And(children) => {
            table[0] = Some((0.0, Vec::new()));
            for &c in children {
                let child = sized_worlds(tree, c, keep, gain, k);
                let mut next: Table = vec![None; k + 1];
                for (a, left) in table.iter().enumerate() {
                    let Some((va, la)) = left else { continue };
                    for (b, right) in child.iter().enumerate().take(k + 1 - a) {
                        let Some((vb, lb)) = right else { continue };
                        if better(va + vb, &next[a + b]) {
                            let mut leaves = la.clone();
                            leaves.extend(lb);
                            next[a + b] = Some((va + vb, leaves));
                        }
                    }
                }
                table = next;
            }
        }
    }
    table
}

fn ranked_keys(tree: &AndXorTree, leaves: &[LeafId]) -> Vec<String> {
    let mut alts: Vec<&TupleAlternative> = leaves.iter().map(|&l| tree.leaf(l)).collect();
    alts.sort_by(|a, b| rank_cmp(a, b).expect("scores checked"));
    alts.into_iter().map(|a| a.key.clone()).collect()
}

/// Median answer under `d_Δ`: the top-k list of a nonzero-probability world
/// maximizing `Σ_{t∈τ} Pr(r(t) ≤ k)`.
///
/// For each threshold alternative `a` the leaves ranked below `a` are
/// dropped and a sized DP finds the best world with exactly `k` remaining
/// leaves; that world is the top-k of a full world. Worlds with fewer than
/// `k` tuples are their own top-k lists and compete as well; such an
/// answer is flagged `short`.
pub fn median_topk_symdiff(tree: &AndXorTree, k: usize) -> Result<TopKAnswer> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let profiles = rank_profiles(tree, k)?;
    let map = profile_map(&profiles);
    let gain: Vec<f64> = tree.leaves().iter().map(|a| map[a.key.as_str()].upsilon1).collect();

    let mut thresholds: Vec<&TupleAlternative> = tree.alternatives().iter().collect();
    thresholds.sort_by(|a, b| rank_cmp(a, b).expect("scores checked"));

    let mut best: Option<(f64, Vec<LeafId>)> = None;
    for a in &thresholds {
        let keep: Vec<bool> = tree
            .leaves()
            .iter()
            .map(|l| rank_cmp(l, a).expect("scores checked") != std::cmp::Ordering::Greater)
            .collect();
        if let Some((v, leaves)) = sized_worlds(tree, 0, &keep, &gain, k).pop().flatten() {
            if better(v, &best) {
                best = Some((v, leaves));
            }
        }
    }
    let all = vec![true; tree.leaf_count()];
    let full = sized_worlds(tree, 0, &all, &gain, k);
    for entry in full[..k].iter().rev().flatten() {
        if better(entry.0, &best) {
            best = Some(entry.clone());
        }
    }
    let (_, leaves) = best.ok_or_else(|| Error::Internal("tree has no world".into()))?;
    let items = ranked_keys(tree, &leaves);
    let d = expected_symdiff(&profiles, &items, k);
    Ok(answer(items, k, TopKMetric::SymDiff, d, "tree-dp"))
}

/// Distribution of the world's top-k list, merged over equal lists.
pub fn topk_distribution(tree: &AndXorTree, k: usize, limit: usize) -> Result<Vec<(Vec<String>, f64)>> {
    tree.require_numeric()?;
    let mut dist: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    for w in tree.enumerate_worlds(limit)? {
        *dist.entry(w.top_k(k)?).or_default() += w.prob;
    }
    Ok(dist.into_iter().collect())
}

/// Top-k lists of `samples` worlds drawn from a generator seeded by `seed`.
pub fn sampled_topk_lists(tree: &AndXorTree, k: usize, samples: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    tree.require_numeric()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let leaves = tree.sample_leaves(&mut rng);
            crate::model::top_k_of(&tree.alternatives_of(&leaves), k)
        })
        .collect()
}

/// Ranks all keys by randomized pivoting on pairwise precedence and keeps
/// the first `k`.
fn pivot_order(keys: &[usize], prec: &[Vec<f64>], rng: &mut ChaCha8Rng, k: usize, out: &mut Vec<usize>) {
    if keys.is_empty() || out.len() >= k {
        return;
    }
    let p = keys[rng.gen_range(0..keys.len())];
    let mut before = Vec::new();
    let mut after = Vec::new();
    for &j in keys {
        if j == p {
            continue;
        }
        // j goes first when it wins the majority; ties fall back to key order
        if prec[j][p] > prec[p][j] || (prec[j][p] == prec[p][j] && j < p) {
            before.push(j);
        } else {
            after.push(j);
        }
    }
    pivot_order(&before, prec, rng, k, out);
    if out.len() < k {
        out.push(p);
    }
    pivot_order(&after, prec, rng, k, out);
}

/// Pairwise precedence matrix `prec[i][j] = Pr(r(t_i) < r(t_j))` over the
/// sorted keys.
pub fn precedence_matrix(tree: &AndXorTree) -> Result<Vec<Vec<f64>>> {
    let keys = tree.keys();
    let n = keys.len();
    let mut prec = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                prec[i][j] = precedes_prob(tree, &keys[i], &keys[j])?;
            }
        }
    }
    Ok(prec)
}

/// Estimator of expected top-k distance: exact over the world distribution
/// when it is small enough, sampled otherwise.
pub struct TopKEvaluator {
    lists: Vec<(Vec<String>, f64)>,
    k: usize,
    exact: bool,
}

impl TopKEvaluator {
    pub fn new(tree: &AndXorTree, k: usize, exact_limit: usize, samples: usize, seed: u64) -> Result<Self> {
        match topk_distribution(tree, k, exact_limit) {
            Ok(lists) => Ok(TopKEvaluator { lists, k, exact: true }),
            Err(Error::TooManyWorlds { .. }) => {
                let mut counts: BTreeMap<Vec<String>, f64> = BTreeMap::new();
                let w = 1.0 / samples as f64;
                for list in sampled_topk_lists(tree, k, samples, seed)? {
                    *counts.entry(list).or_default() += w;
                }
                Ok(TopKEvaluator {
                    lists: counts.into_iter().collect(),
                    k,
                    exact: false,
                })
            }
            Err(e) => Err(e),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn expected(&self, items: &[String], metric: TopKMetric) -> f64 {
        self.lists
            .iter()
            .map(|(l, p)| p * distance(items, l, self.k, metric))
            .sum()
    }
}

/// Kendall consensus: best of the footrule answer and `trials` randomized
/// pivot aggregations, scored by expected `d_K`.
pub fn approx_topk_kendall(tree: &AndXorTree, k: usize, trials: usize, seed: u64) -> Result<TopKAnswer> {
    require_keys(tree, k)?;
    let profiles = rank_profiles(tree, k)?;
    let mut candidates = vec![footrule_answer(&profiles, k)?.items];
    let prec = precedence_matrix(tree)?;
    let keys: Vec<usize> = (0..tree.keys().len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut order = Vec::with_capacity(k);
        pivot_order(&keys, &prec, &mut rng, k, &mut order);
        candidates.push(order.into_iter().map(|i| tree.keys()[i].clone()).collect());
    }
    let eval = TopKEvaluator::new(tree, k, KENDALL_EXACT_WORLDS, KENDALL_SAMPLES, seed)?;
    let mut best: Option<(f64, Vec<String>)> = None;
    for items in candidates {
        let d = eval.expected(&items, TopKMetric::Kendall);
        if best.as_ref().is_none_or(|(b, _)| d < b - 1e-12) {
            best = Some((d, items));
        }
    }
    let (d, items) = best.expect("at least one candidate");
    let method = if eval.is_exact() {
        "pivot+exact"
    } else {
        "pivot+montecarlo"
    };
    Ok(answer(items, k, TopKMetric::Kendall, d, method))
}

/// Dispatches to the consensus solver for `metric`.
pub fn consensus_topk(
    tree: &AndXorTree,
    k: usize,
    metric: TopKMetric,
    median: bool,
    trials: usize,
    seed: u64,
) -> Result<TopKAnswer> {
    match (metric, median) {
        (TopKMetric::SymDiff, false) => mean_topk_symdiff(tree, k),
        (TopKMetric::SymDiff, true) => median_topk_symdiff(tree, k),
        (TopKMetric::Intersection, false) => mean_topk_intersection(tree, k),
        (TopKMetric::Footrule, false) => mean_topk_footrule(tree, k),
        (TopKMetric::Kendall, false) => approx_topk_kendall(tree, k, trials, seed),
        (m, true) => Err(Error::MetricMismatch {
            metric: m.to_string(),
            query: "median top-k".to_string(),
        }),
    }
}
