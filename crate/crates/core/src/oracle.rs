//! Brute-force ground truth.
//!
//! Expected distances are computed by summing over enumerated worlds, or
//! estimated by sampling when there are too many. Exhaustive search scans a
//! whole answer space: all subsets, all ordered k-lists, all partitions, or
//! the answers of the enumerated worlds for median spaces.

use crate::aggregate::GroupMatrix;
use crate::cluster::{all_partitions, bell_number, world_clustering, Clustering};
use crate::error::{Error, Result};
use crate::model::{top_k_of, AndXorTree, TupleAlternative};
use crate::set_consensus::{jaccard_distance, SetMetric};
use crate::topk::{distance as topk_distance, TopKMetric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;

pub const DEFAULT_WORLD_LIMIT: usize = 50_000;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SPACE_LIMIT: u128 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    /// Largest world count handled by enumeration.
    pub world_limit: usize,
    /// Monte Carlo sample count.
    pub samples: usize,
    pub seed: u64,
    /// Largest answer space scanned by exhaustive search.
    pub space_limit: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            world_limit: DEFAULT_WORLD_LIMIT,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            space_limit: DEFAULT_SPACE_LIMIT,
        }
    }
}

/// Where worlds come from.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    Tree(&'a AndXorTree),
    Groups(&'a GroupMatrix),
}

/// A query together with the distance used to compare its answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    Set(SetMetric),
    TopK { k: usize, metric: TopKMetric },
    GroupBy,
    Cluster,
}

impl Query {
    /// Combines a query kind (`set`, `topk`, `groupby`, `cluster`) with a
    /// metric name.
    pub fn parse(kind: &str, metric: &str, k: Option<usize>) -> Result<Query> {
        let mismatch = || Error::MetricMismatch {
            metric: metric.to_string(),
            query: kind.to_string(),
        };
        match kind {
            "set" => match metric {
                "symdiff" => Ok(Query::Set(SetMetric::SymDiff)),
                "jaccard" => Ok(Query::Set(SetMetric::Jaccard)),
                _ => Err(mismatch()),
            },
            "topk" => {
                let metric = metric.parse::<TopKMetric>().map_err(|_| mismatch())?;
                match k {
                    Some(0) | None => Err(Error::ZeroK),
                    Some(k) => Ok(Query::TopK { k, metric }),
                }
            }
            "groupby" if metric == "sqdist" => Ok(Query::GroupBy),
            "cluster" if metric == "pairs" => Ok(Query::Cluster),
            "groupby" | "cluster" => Err(mismatch()),
            other => Err(Error::BadAnswer(format!("unknown query kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Answer {
    Set(Vec<TupleAlternative>),
    TopK(Vec<String>),
    Counts(Vec<f64>),
    Clustering(Clustering),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Enumeration,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::MonteCarlo => "montecarlo",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerSpace {
    Mean,
    Median,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub answer: Answer,
    pub expected_distance: f64,
    pub method: Method,
    /// Worlds summed over, or samples drawn.
    pub sample_count: usize,
    pub seed: Option<u64>,
    /// Half-width of the 95% confidence interval of a sampled estimate.
    pub ci_half_width: Option<f64>,
    /// Size of the scanned answer space, for exhaustive searches.
    pub candidates: Option<usize>,
}

fn check_answer(source: Source, query: Query, answer: &Answer) -> Result<()> {
    match (query, answer, source) {
        (Query::Set(_), Answer::Set(_), Source::Tree(_)) => Ok(()),
        (Query::TopK { k, .. }, Answer::TopK(items), Source::Tree(tree)) => {
            if items.len() > k {
                return Err(Error::BadAnswer(format!("{} items for k = {k}", items.len())));
            }
            let mut seen = BTreeSet::new();
            for t in items {
                tree.require_key(t)?;
                if !seen.insert(t) {
                    return Err(Error::DuplicateItem(t.clone()));
                }
            }
            Ok(())
        }
        (Query::GroupBy, Answer::Counts(r), Source::Groups(p)) => {
            if r.len() != p.group_count() {
                return Err(Error::Dimension {
                    expected: p.group_count(),
                    got: r.len(),
                });
            }
            Ok(())
        }
        (Query::Cluster, Answer::Clustering(c), Source::Tree(tree)) => {
            if c.keys() != tree.keys() {
                return Err(Error::BadAnswer(
                    "clustering keys differ from the relation's keys".into(),
                ));
            }
            Ok(())
        }
        (_, _, Source::Groups(_)) => Err(Error::MetricMismatch {
            metric: "group matrix input".into(),
            query: "non-group-by".into(),
        }),
        (Query::GroupBy, _, Source::Tree(_)) => Err(Error::WrongModel("a group matrix")),
        _ => Err(Error::BadAnswer("answer shape does not match the query".into())),
    }
}

/// Distance between an answer and the answer of one world.
pub fn answer_distance(query: Query, a: &Answer, b: &Answer) -> f64 {
    match (query, a, b) {
        (Query::Set(SetMetric::SymDiff), Answer::Set(x), Answer::Set(y)) => {
            (x.iter().filter(|t| !y.contains(t)).count() + y.iter().filter(|t| !x.contains(t)).count()) as f64
        }
        (Query::Set(SetMetric::Jaccard), Answer::Set(x), Answer::Set(y)) => jaccard_distance(x, y),
        (Query::TopK { k, metric }, Answer::TopK(x), Answer::TopK(y)) => topk_distance(x, y, k, metric),
        (Query::GroupBy, Answer::Counts(x), Answer::Counts(y)) => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
        (Query::Cluster, Answer::Clustering(x), Answer::Clustering(y)) => x.distance(y) as f64,
        _ => panic!("answer shapes differ"),
    }
}

/// Answer of the query on one world of a tree.
fn tree_world_answer(tree: &AndXorTree, query: Query, world: &[TupleAlternative]) -> Result<Answer> {
    Ok(match query {
        Query::Set(_) => Answer::Set(world.to_vec()),
        Query::TopK { k, .. } => Answer::TopK(top_k_of(world, k)?),
        Query::Cluster => Answer::Clustering(world_clustering(tree.keys(), world)),
        Query::GroupBy => return Err(Error::WrongModel("a group matrix")),
    })
}

/// Every world's answer with its probability.
pub fn world_answers(source: Source, query: Query, limit: usize) -> Result<Vec<(Answer, f64)>> {
    match source {
        Source::Tree(tree) => {
            if let Query::TopK { .. } = query {
                tree.require_numeric()?;
            }
            tree.enumerate_worlds(limit)?
                .into_iter()
                .map(|w| Ok((tree_world_answer(tree, query, &w.alternatives)?, w.prob)))
                .collect()
        }
        Source::Groups(p) => {
            if query != Query::GroupBy {
                return Err(Error::WrongModel("an and/xor tree"));
            }
            Ok(p.count_distribution(limit)?
                .into_iter()
                .map(|(c, q)| (Answer::Counts(c.into_iter().map(|x| x as f64).collect()), q))
                .collect())
        }
    }
}

fn sample_answer(source: Source, query: Query, rng: &mut ChaCha8Rng) -> Result<Answer> {
    match source {
        Source::Tree(tree) => {
            let leaves = tree.sample_leaves(rng);
            tree_world_answer(tree, query, &tree.alternatives_of(&leaves))
        }
        Source::Groups(p) => {
            let mut counts = vec![0.0; p.group_count()];
            for row in p.rows() {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = row.iter().rposition(|&x| x > 0.0).unwrap_or(0);
                for (j, &x) in row.iter().enumerate() {
                    acc += x;
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                counts[pick] += 1.0;
            }
            Ok(Answer::Counts(counts))
        }
    }
}

/// `E[d(answer, answer(pw))]`, exact when the worlds can be enumerated
/// within `config.world_limit`, sampled otherwise.
pub fn expected_distance(source: Source, query: Query, answer: &Answer, config: &OracleConfig) -> Result<OracleReport> {
    check_answer(source, query, answer)?;
    match world_answers(source, query, config.world_limit) {
        Ok(worlds) => {
            let value = worlds.iter().map(|(w, p)| p * answer_distance(query, answer, w)).sum();
            Ok(OracleReport {
                answer: answer.clone(),
                expected_distance: value,
                method: Method::Enumeration,
                sample_count: worlds.len(),
                seed: None,
                ci_half_width: None,
                candidates: None,
            })
        }
        Err(Error::TooManyWorlds { .. }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let n = config.samples.max(2);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let d = answer_distance(query, answer, &sample_answer(source, query, &mut rng)?);
                sum += d;
                sum_sq += d * d;
            }
            let mean = sum / n as f64;
            let var = ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
            Ok(OracleReport {
                answer: answer.clone(),
                expected_distance: mean,
                method: Method::MonteCarlo,
                sample_count: n,
                seed: Some(config.seed),
                ci_half_width: Some(1.96 * (var / n as f64).sqrt()),
                candidates: None,
            })
        }
        Err(e) => Err(e),
    }
}

fn guard(cardinality: u128, limit: u128) -> Result<()> {
    if cardinality > limit {
        Err(Error::SpaceTooLarge { cardinality, limit })
    } else {
        Ok(())
    }
}

/// Number of ordered `k`-lists drawn from `n` items, saturating.
pub fn ordered_lists_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128))
}

fn ordered_lists(keys: &[String], k: usize) -> Vec<Vec<String>> {
    fn go(keys: &[String], k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<String>>) {
        if cur.len() == k {
            out.push(cur.iter().map(|&i| keys[i].clone()).collect());
            return;
        }
        for i in 0..keys.len() {
            if !cur.contains(&i) {
                cur.push(i);
                go(keys, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(keys, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn candidate_space(
    source: Source,
    query: Query,
    space: AnswerSpace,
    worlds: &[(Answer, f64)],
    limit: u128,
) -> Result<Vec<Answer>> {
    if space == AnswerSpace::Median {
        let mut out: Vec<Answer> = Vec::new();
        for (a, p) in worlds {
            if *p > 0.0 && !out.contains(a) {
                out.push(a.clone());
            }
        }
        return Ok(out);
    }
    match (query, source) {
        (Query::Set(_), Source::Tree(tree)) => {
            let alts = tree.alternatives();
            let size = if alts.len() >= 127 {
                u128::MAX
            } else {
                1u128 << alts.len()
            };
            guard(size, limit)?;
            Ok((0..size as usize)
                .map(|mask| {
                    Answer::Set(
                        alts.iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, a)| a.clone())
                            .collect(),
                    )
                })
                .collect())
        }
        (Query::TopK { k, .. }, Source::Tree(tree)) => {
            let keys = tree.keys();
            if keys.len() < k {
                return Err(Error::NotEnoughKeys {
                    needed: k,
                    available: keys.len(),
                });
            }
            guard(ordered_lists_count(keys.len(), k), limit)?;
            Ok(ordered_lists(keys, k).into_iter().map(Answer::TopK).collect())
        }
        (Query::Cluster, Source::Tree(tree)) => {
            let n = tree.keys().len();
            guard(bell_number(n), limit)?;
            Ok(all_partitions(n)
                .into_iter()
                .map(|l| Answer::Clustering(Clustering::from_labels(tree.keys().to_vec(), &l).expect("sized")))
                .collect())
        }
        (Query::GroupBy, _) => Err(Error::ContinuousSpace("group-by count")),
        _ => Err(Error::WrongModel("an and/xor tree")),
    }
}

/// Exhaustive argmin of the expected distance over an answer space. Ties go
/// to the first candidate in enumeration order. Worlds must be enumerable.
pub fn exhaustive_optimum(
    source: Source,
    query: Query,
    space: AnswerSpace,
    config: &OracleConfig,
) -> Result<OracleReport> {
    let worlds = world_answers(source, query, config.world_limit)?;
    let candidates = candidate_space(source, query, space, &worlds, config.space_limit)?;
    let mut best: Option<(f64, &Answer)> = None;
    for c in &candidates {
        let v: f64 = worlds.iter().map(|(w, p)| p * answer_distance(query, c, w)).sum();
        if best.is_none_or(|(b, _)| v < b - 1e-12) {
            best = Some((v, c));
        }
    }
    let (value, answer) = best.ok_or_else(|| Error::Internal("empty answer space".into()))?;
    Ok(OracleReport {
        answer: answer.clone(),
        expected_distance: value,
        method: Method::Enumeration,
        sample_count: worlds.len(),
        seed: None,
        ci_half_width: None,
        candidates: Some(candidates.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{from_bid, three_world_example, BidRow, Node};

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn example_top2_symdiff() {
        let tree = three_world_example();
        let q = Query::TopK {
            k: 2,
            metric: TopKMetric::SymDiff,
        };
        let r = expected_distance(
            Source::Tree(&tree),
            q,
            &Answer::TopK(strings(&["t3", "t4"])),
            &OracleConfig::default(),
        )
        .unwrap();
        // pw1 and pw2 each differ in one item of four: 2/4
        assert!((r.expected_distance - 0.3).abs() < 1e-12);
        assert_eq!(r.method, Method::Enumeration);
        assert_eq!(r.sample_count, 3);
    }

    #[test]
    fn empty_set_distance_is_expected_size() {
        let tree = three_world_example();
        let r = expected_distance(
            Source::Tree(&tree),
            Query::Set(SetMetric::SymDiff),
            &Answer::Set(vec![]),
            &OracleConfig::default(),
        )
        .unwrap();
        assert!((r.expected_distance - 3.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_tree_optimum() {
        let tree = AndXorTree::new(Node::and(vec![Node::leaf("a", 2.0), Node::leaf("b", 1.0)])).unwrap();
        let q = Query::TopK {
            k: 2,
            metric: TopKMetric::Footrule,
        };
        let r = exhaustive_optimum(Source::Tree(&tree), q, AnswerSpace::Mean, &OracleConfig::default()).unwrap();
        assert_eq!(r.answer, Answer::TopK(strings(&["a", "b"])));
        assert_eq!(r.expected_distance, 0.0);
        assert_eq!(r.candidates, Some(2));
    }

    #[test]
    fn six_independent_tuples() {
        let rows: Vec<_> = [0.9, 0.2, 0.6, 0.4, 0.51, 0.7]
            .iter()
            .enumerate()
            .map(|(i, p)| BidRow::new(format!("t{i}"), i as f64, *p))
            .collect();
        let tree = from_bid(&rows).unwrap();
        let r = exhaustive_optimum(
            Source::Tree(&tree),
            Query::Set(SetMetric::SymDiff),
            AnswerSpace::Mean,
            &OracleConfig::default(),
        )
        .unwrap();
        let mean = crate::set_consensus::mean_world_symdiff(&tree);
        assert_eq!(r.answer, Answer::Set(mean.alternatives));
        assert!((r.expected_distance - mean.expected_distance).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let rows: Vec<_> = (0..10)
            .map(|i| BidRow::new(format!("t{i}"), i as f64, 0.1 * i as f64))
            .collect();
        let tree = from_bid(&rows).unwrap();
        let q = Query::TopK {
            k: 3,
            metric: TopKMetric::Kendall,
        };
        let ans = Answer::TopK(strings(&["t9", "t8", "t7"]));
        let exact = expected_distance(Source::Tree(&tree), q, &ans, &OracleConfig::default()).unwrap();
        let config = OracleConfig {
            world_limit: 10,
            samples: 20_000,
            seed: 5,
            ..OracleConfig::default()
        };
        let mc = expected_distance(Source::Tree(&tree), q, &ans, &config).unwrap();
        assert_eq!(mc.method, Method::MonteCarlo);
        let hw = mc.ci_half_width.unwrap();
        assert!(
            (mc.expected_distance - exact.expected_distance).abs() <= hw * 1.5,
            "{} vs {}",
            mc.expected_distance,
            exact.expected_distance
        );
        let again = expected_distance(Source::Tree(&tree), q, &ans, &config).unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn group_queries() {
        let p = GroupMatrix::new(strings(&["a", "b"]), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = expected_distance(
            Source::Groups(&p),
            Query::GroupBy,
            &Answer::Counts(vec![1.0, 1.0]),
            &OracleConfig::default(),
        )
        .unwrap();
        assert!((r.expected_distance - 1.0).abs() < 1e-12);
        assert!(matches!(
            exhaustive_optimum(
                Source::Groups(&p),
                Query::GroupBy,
                AnswerSpace::Mean,
                &OracleConfig::default()
            ),
            Err(Error::ContinuousSpace(_))
        ));
        let med = exhaustive_optimum(
            Source::Groups(&p),
            Query::GroupBy,
            AnswerSpace::Median,
            &OracleConfig::default(),
        )
        .unwrap();
        assert_eq!(med.answer, Answer::Counts(vec![1.0, 1.0]));
    }

    #[test]
    fn refusals() {
        let rows: Vec<_> = (0..30).map(|i| BidRow::new(format!("t{i}"), i as f64, 0.5)).collect();
        let tree = from_bid(&rows).unwrap();
        let small = OracleConfig {
            world_limit: 1 << 31,
            ..OracleConfig::default()
        };
        let err = candidate_space(
            Source::Tree(&tree),
            Query::Set(SetMetric::SymDiff),
            AnswerSpace::Mean,
            &[],
            small.space_limit,
        );
        assert!(matches!(err, Err(Error::SpaceTooLarge { cardinality, .. }) if cardinality == 1 << 30));
        assert!(matches!(
            Query::parse("set", "kendall", None),
            Err(Error::MetricMismatch { .. })
        ));
        assert!(matches!(Query::parse("topk", "footrule", None), Err(Error::ZeroK)));
        assert_eq!(Query::parse("cluster", "pairs", None).unwrap(), Query::Cluster);
    }

    #[test]
    fn bad_answers() {
        let tree = three_world_example();
        let q = Query::TopK {
            k: 2,
            metric: TopKMetric::SymDiff,
        };
        let cfg = OracleConfig::default();
        assert!(expected_distance(Source::Tree(&tree), q, &Answer::TopK(strings(&["t1", "t1"])), &cfg).is_err());
        assert!(expected_distance(Source::Tree(&tree), q, &Answer::TopK(strings(&["zz"])), &cfg).is_err());
        assert!(expected_distance(Source::Tree(&tree), q, &Answer::Set(vec![]), &cfg).is_err());
    }
}
