//! Group-by count consensus over independent tuples with uncertain groups.
//!
//! `P[i][j]` is the probability that tuple `i` falls into group `j`. The
//! random count vector `R` has mean `r̄ = 1P`. The median is the realizable
//! vector closest to `r̄`; each of its entries is `⌊r̄⌋` or `⌈r̄⌉`, and it is
//! found as a min-cost flow.

use crate::error::{Error, Result};
use crate::model::{AndXorTree, PROB_TOL};
use crate::solvers::{solve_min_cost_flow, FlowNetwork};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatrix {
    groups: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl GroupMatrix {
    pub fn new(groups: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::GroupMatrix("no groups".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != groups.len() {
                return Err(Error::GroupMatrix(format!(
                    "row {i} has {} entries for {} groups",
                    row.len(),
                    groups.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::GroupMatrix(format!("row {i} has entry {p} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::GroupMatrix(format!("row {i} sums to {sum}")));
            }
        }
        Ok(GroupMatrix { groups, rows })
    }

    /// Group matrix of a BID relation whose keys are always present; the
    /// distinct values become the groups, in value order.
    pub fn from_tree(tree: &AndXorTree) -> Result<Self> {
        let blocks = tree.as_bid().ok_or(Error::WrongModel("a BID relation"))?;
        let mut values: Vec<_> = blocks
            .iter()
            .flat_map(|b| b.alternatives.iter().map(|(v, _)| v.clone()))
            .collect();
        values.sort();
        values.dedup();
        let rows = blocks
            .iter()
            .map(|b| {
                let mut row = vec![0.0; values.len()];
                for (v, p) in &b.alternatives {
                    row[values.binary_search(v).expect("listed")] += p;
                }
                row
            })
            .collect();
        GroupMatrix::new(values.iter().map(|v| v.to_string()).collect(), rows)
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn tuple_count(&self) -> usize {
        self.rows.len()
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Distribution of the count vector, by convolution over tuples.
    /// Fails once more than `limit` distinct vectors are reachable.
    pub fn count_distribution(&self, limit: usize) -> Result<Vec<(Vec<usize>, f64)>> {
        let mut dist: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        dist.insert(vec![0; self.group_count()], 1.0);
        for row in &self.rows {
            let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
            for (counts, q) in &dist {
                for (j, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        let mut c = counts.clone();
                        c[j] += 1;
                        *next.entry(c).or_default() += q * p;
                    }
                }
            }
            if next.len() > limit {
                return Err(Error::TooManyWorlds {
                    reached: next.len(),
                    limit,
                });
            }
            dist = next;
        }
        Ok(dist.into_iter().collect())
    }
}

/// `r̄ = 1P`, the mean answer under squared distance.
pub fn mean_counts(p: &GroupMatrix) -> Vec<f64> {
    let mut r = vec![0.0; p.group_count()];
    for row in &p.rows {
        for (acc, x) in r.iter_mut().zip(row) {
            *acc += x;
        }
    }
    r
}

/// `E[‖r - R‖²] = Σ_j Var(R_j) + (r_j - r̄_j)²`.
pub fn expected_sq_distance(p: &GroupMatrix, r: &[f64]) -> Result<f64> {
    if r.len() != p.group_count() {
        return Err(Error::Dimension {
            expected: p.group_count(),
            got: r.len(),
        });
    }
    let mean = mean_counts(p);
    let var: f64 = p.rows.iter().flatten().map(|x| x * (1.0 - x)).sum();
    Ok(var + r.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedianCounts {
    pub counts: Vec<usize>,
    pub mean: Vec<f64>,
    pub expected_distance: f64,
}

/// Floor of `x`, with values within tolerance of an integer snapped to it.
/// Returns the floor and whether `x` is fractional.
fn split(x: f64) -> (i64, bool) {
    let near = x.round();
    if (x - near).abs() <= PROB_TOL {
        (near as i64, false)
    } else {
        (x.floor() as i64, true)
    }
}

/// Realizable count vector closest to `r̄`.
///
/// Network: source → tuple (capacity 1), tuple → group where `p > 0`,
/// group → sink with fixed flow `⌊r̄⌋` plus, for fractional `r̄`, one extra
/// unit costing `(⌈r̄⌉ - r̄)² - (⌊r̄⌋ - r̄)²`. A min-cost flow of value `n`
/// picks which groups round up.
pub fn median_counts(p: &GroupMatrix) -> Result<MedianCounts> {
    let n = p.tuple_count();
    let m = p.group_count();
    let mean = mean_counts(p);
    let source = 0;
    let sink = n + m + 1;
    let mut net = FlowNetwork::new(n + m + 2, source, sink, n as i64);
    for (i, row) in p.rows.iter().enumerate() {
        net.add_edge(source, 1 + i, 0, 1, 0.0);
        for (j, &x) in row.iter().enumerate() {
            if x > 0.0 {
                net.add_edge(1 + i, 1 + n + j, 0, 1, 0.0);
            }
        }
    }
    let mut ups = Vec::with_capacity(m);
    let mut floors = Vec::with_capacity(m);
    for (j, &r) in mean.iter().enumerate() {
        let (lo, fractional) = split(r);
        floors.push(lo);
        net.add_edge(1 + n + j, sink, lo, lo, 0.0);
        ups.push(fractional.then(|| {
            let cost = (lo as f64 + 1.0 - r).powi(2) - (lo as f64 - r).powi(2);
            net.add_edge(1 + n + j, sink, 0, 1, cost)
        }));
    }
    let sol = solve_min_cost_flow(&net).map_err(|e| match e {
        Error::Infeasible => Error::Internal("count network is infeasible".into()),
        other => other,
    })?;
    let counts: Vec<usize> = floors
        .iter()
        .zip(&ups)
        .map(|(&lo, up)| (lo + up.map_or(0, |e| sol.flow[e])) as usize)
        .collect();
    for (c, r) in counts.iter().zip(&mean) {
        if (*c as f64) < r.floor() - PROB_TOL || (*c as f64) > r.ceil() + PROB_TOL {
            return Err(Error::Internal(format!("count {c} is not a rounding of {r}")));
        }
    }
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let expected_distance = expected_sq_distance(p, &as_f64)?;
    Ok(MedianCounts {
        counts,
        mean,
        expected_distance,
    })
}
