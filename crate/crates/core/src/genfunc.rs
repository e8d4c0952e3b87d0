//! Generating functions over and/xor trees.
//!
//! Each leaf is mapped to a variable (or the constant 1). A leaf contributes
//! its variable, an OR node `u` contributes
//! `(1 - Σ Pr(u,v)) + Σ Pr(u,v)·F_v` and an AND node the product of its
//! children. The coefficient of `x₁^i₁ x₂^i₂ …` in the root polynomial is the
//! probability that exactly `i_j` leaves mapped to `x_j` are present.
//!
//! Polynomials are dense, in at most three variables, truncated per variable.
//! Mass of terms above the truncation is kept in an overflow bucket so the
//! total stays one.

use crate::error::{Error, Result};
use crate::model::{rank_cmp, AndXorTree, Flat, LeafId, NodeId, TupleAlternative};
use std::cmp::Ordering;

pub const MAX_VARS: usize = 3;

type Exps = [usize; MAX_VARS];

/// Truncated multivariate polynomial with nonnegative coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    bounds: Vec<usize>,
    strides: Exps,
    coeffs: Vec<f64>,
    overflow: f64,
}

impl Polynomial {
    fn zero(bounds: &[usize]) -> Self {
        let mut strides = [0; MAX_VARS];
        let mut size = 1;
        for v in (0..bounds.len()).rev() {
            strides[v] = size;
            size *= bounds[v] + 1;
        }
        Polynomial {
            bounds: bounds.to_vec(),
            strides,
            coeffs: vec![0.0; size],
            overflow: 0.0,
        }
    }

    fn constant(bounds: &[usize], c: f64) -> Self {
        let mut p = Self::zero(bounds);
        p.coeffs[0] = c;
        p
    }

    fn variable(bounds: &[usize], var: usize) -> Self {
        let mut p = Self::zero(bounds);
        if bounds[var] >= 1 {
            p.coeffs[p.strides[var]] = 1.0;
        } else {
            p.overflow = 1.0;
        }
        p
    }

    pub fn var_count(&self) -> usize {
        self.bounds.len()
    }

    /// Highest kept degree per variable.
    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// Coefficient of `Π x_v^exps[v]`; zero outside the truncation.
    pub fn coeff(&self, exps: &[usize]) -> f64 {
        assert_eq!(exps.len(), self.bounds.len(), "exponent arity");
        if exps.iter().zip(&self.bounds).any(|(e, b)| e > b) {
            return 0.0;
        }
        let idx: usize = exps.iter().zip(&self.strides).map(|(e, s)| e * s).sum();
        self.coeffs[idx]
    }

    /// Total mass of terms above the truncation bound of some variable.
    pub fn overflow(&self) -> f64 {
        self.overflow
    }

    /// Sum of all kept coefficients plus the overflow bucket.
    pub fn total(&self) -> f64 {
        self.coeffs.iter().sum::<f64>() + self.overflow
    }

    fn exps_of(&self, mut idx: usize) -> Exps {
        let mut e = [0; MAX_VARS];
        for (slot, &stride) in e.iter_mut().zip(&self.strides).take(self.bounds.len()) {
            *slot = idx / stride;
            idx %= stride;
        }
        e
    }

    /// Nonzero kept terms as `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let n = self.bounds.len();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(move |(i, c)| (self.exps_of(i)[..n].to_vec(), *c))
    }

    fn nonzero(&self) -> Vec<(Exps, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (self.exps_of(i), *c))
            .collect()
    }

    fn add_scaled(&mut self, other: &Polynomial, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        self.overflow += s * other.overflow;
    }

    /// Truncated product.
    fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(&self.bounds);
        let lhs = self.nonzero();
        let rhs = other.nonzero();
        let lhs_kept: f64 = lhs.iter().map(|(_, c)| c).sum();
        let rhs_kept: f64 = rhs.iter().map(|(_, c)| c).sum();
        out.overflow = self.overflow * (rhs_kept + other.overflow) + lhs_kept * other.overflow;
        let n = self.bounds.len();
        for (ea, ca) in &lhs {
            'rhs: for (eb, cb) in &rhs {
                let mut idx = 0;
                for v in 0..n {
                    let e = ea[v] + eb[v];
                    if e > self.bounds[v] {
                        out.overflow += ca * cb;
                        continue 'rhs;
                    }
                    idx += e * self.strides[v];
                }
                out.coeffs[idx] += ca * cb;
            }
        }
        out
    }
}

/// Maps each leaf to a variable index, or `None` for the constant 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableAssignment {
    vars: Vec<Option<usize>>,
}

impl VariableAssignment {
    pub fn new(tree: &AndXorTree, mut map: impl FnMut(LeafId, &TupleAlternative) -> Option<usize>) -> Self {
        VariableAssignment {
            vars: tree.leaves().iter().enumerate().map(|(i, a)| map(i, a)).collect(),
        }
    }

    pub fn from_vec(vars: Vec<Option<usize>>) -> Self {
        VariableAssignment { vars }
    }

    pub fn var(&self, leaf: LeafId) -> Option<usize> {
        self.vars[leaf]
    }
}

/// Expands the generating function of `tree` under `assign`, keeping degrees
/// up to `bounds[v]` in variable `v`.
pub fn evaluate(tree: &AndXorTree, assign: &VariableAssignment, bounds: &[usize]) -> Result<Polynomial> {
    if bounds.is_empty() || bounds.len() > MAX_VARS {
        return Err(Error::VariableCount(bounds.len()));
    }
    if let Some(v) = bounds.iter().position(|&b| b == 0) {
        return Err(Error::ZeroTruncation(v));
    }
    if assign.vars.len() != tree.leaf_count() {
        return Err(Error::Dimension {
            expected: tree.leaf_count(),
            got: assign.vars.len(),
        });
    }
    if let Some(&index) = assign.vars.iter().flatten().find(|&&v| v >= bounds.len()) {
        return Err(Error::VariableIndex {
            index,
            count: bounds.len(),
        });
    }
    Ok(eval_node(tree, assign, bounds, 0))
}

fn eval_node(tree: &AndXorTree, assign: &VariableAssignment, bounds: &[usize], id: NodeId) -> Polynomial {
    match tree.flat(id) {
        Flat::Leaf(leaf) => match assign.vars[*leaf] {
            Some(v) => Polynomial::variable(bounds, v),
            None => Polynomial::constant(bounds, 1.0),
        },
        Flat::Or { children, residual } => {
            let mut acc = Polynomial::constant(bounds, *residual);
            for &(p, c) in children {
                if p > 0.0 {
                    acc.add_scaled(&eval_node(tree, assign, bounds, c), p);
                }
            }
            acc
        }
        Flat::And(children) => children.iter().fold(Polynomial::constant(bounds, 1.0), |acc, &c| {
            acc.mul(&eval_node(tree, assign, bounds, c))
        }),
    }
}

/// Single-variable expansion used by the helpers below; bounds are always
/// positive so evaluation cannot fail.
fn expand(
    tree: &AndXorTree,
    bounds: &[usize],
    map: impl FnMut(LeafId, &TupleAlternative) -> Option<usize>,
) -> Polynomial {
    let assign = VariableAssignment::new(tree, map);
    eval_node(tree, &assign, bounds, 0)
}

/// Probability that one leaf matching `pred` is present. The matching leaves
/// must be mutually exclusive (for instance all leaves of one key, or of one
/// alternative).
pub(crate) fn presence_probability(tree: &AndXorTree, pred: impl Fn(&TupleAlternative) -> bool) -> f64 {
    expand(tree, &[1], |_, a| pred(a).then_some(0)).coeff(&[1])
}

/// `Pr(pw = world)`, exactly.
pub fn world_probability(tree: &AndXorTree, world: &[TupleAlternative]) -> f64 {
    let size = world.len();
    let poly = expand(tree, &[size.max(1), 1], |_, a| {
        Some(if world.binary_search(a).is_ok() { 0 } else { 1 })
    });
    poly.coeff(&[size, 0])
}

/// Marginal probability of every distinct alternative, in alternative order.
/// A leaf is present with the product of the OR edge probabilities on its
/// root path; leaves sharing an alternative are exclusive, so they add.
pub fn alternative_marginals(tree: &AndXorTree) -> Vec<(TupleAlternative, f64)> {
    let mut reach = vec![0.0; tree.leaf_count()];
    let mut stack = vec![(0, 1.0)];
    while let Some((id, p)) = stack.pop() {
        match tree.flat(id) {
            Flat::Leaf(leaf) => reach[*leaf] = p,
            Flat::And(children) => stack.extend(children.iter().map(|&c| (c, p))),
            Flat::Or { children, .. } => stack.extend(children.iter().map(|&(q, c)| (c, p * q))),
        }
    }
    let mut out: Vec<(TupleAlternative, f64)> = tree.alternatives().iter().map(|a| (a.clone(), 0.0)).collect();
    for (leaf, p) in reach.into_iter().enumerate() {
        let i = out
            .binary_search_by(|(a, _)| a.cmp(tree.leaf(leaf)))
            .expect("leaf alternative is listed");
        out[i].1 += p;
    }
    out
}

/// Rank distribution of one key and the ranking scores derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct RankProfile {
    pub key: String,
    pub k: usize,
    /// `dist[i-1] = Pr(r(t) = i)`, for `i` up to `max(n, k)`.
    pub dist: Vec<f64>,
    /// `cumulative[i-1] = Pr(r(t) <= i)`.
    pub cumulative: Vec<f64>,
    /// `Pr(t present)`.
    pub presence: f64,
    /// `Pr(r(t) > k)`, including the event that `t` is absent.
    pub tail: f64,
    pub upsilon1: f64,
    pub upsilon2: f64,
    /// `upsilon3[i-1] = Σ_{j≤k} Pr(r(t) = j)·|i - j| - i·Pr(r(t) > k)`, for `i = 1..=k`.
    pub upsilon3: Vec<f64>,
    pub upsilon_h: f64,
}

impl RankProfile {
    /// `Pr(r(t) <= i)` for `i >= 1`.
    pub fn rank_at_most(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cumulative[(i - 1).min(self.cumulative.len() - 1)]
        }
    }

    fn from_dist(key: &str, k: usize, dist: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for p in &dist {
            acc += p;
            cumulative.push(acc);
        }
        let presence = acc;
        let upsilon1 = cumulative[k - 1];
        let tail = (1.0 - upsilon1).max(0.0);
        let upsilon2 = (1..=k).map(|i| i as f64 * dist[i - 1]).sum();
        let upsilon3 = (1..=k)
            .map(|i| (1..=k).map(|j| dist[j - 1] * i.abs_diff(j) as f64).sum::<f64>() - i as f64 * tail)
            .collect();
        let upsilon_h = (1..=k).map(|i| cumulative[i - 1] / i as f64).sum();
        RankProfile {
            key: key.to_string(),
            k,
            dist,
            cumulative,
            presence,
            tail,
            upsilon1,
            upsilon2,
            upsilon3,
            upsilon_h,
        }
    }
}

/// `Pr(r(a) = i)` for one alternative `a`, indexed from rank 1 up to the
/// number of keys: `[x^{i-1} y]` with `a` mapped to `y` and every
/// better-ranked leaf of another key mapped to `x`.
pub fn alternative_rank_dist(tree: &AndXorTree, alt: &TupleAlternative) -> Result<Vec<f64>> {
    tree.require_key(&alt.key)?;
    tree.require_numeric()?;
    if !tree.alternatives().contains(alt) {
        return Err(Error::UnknownAlternative {
            key: alt.key.clone(),
            value: alt.value.to_string(),
        });
    }
    let n = tree.keys().len();
    let poly = expand(tree, &[(n - 1).max(1), 1], |_, leaf| {
        if leaf == alt {
            Some(1)
        } else if leaf.key != alt.key && rank_cmp(leaf, alt).ok() == Some(Ordering::Less) {
            Some(0)
        } else {
            None
        }
    });
    Ok((0..n).map(|i| poly.coeff(&[i, 1])).collect())
}

/// Rank distribution of `key`, summed over the key's alternatives.
pub fn rank_profile(tree: &AndXorTree, key: &str, k: usize) -> Result<RankProfile> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    tree.require_key(key)?;
    tree.require_numeric()?;
    let n = tree.keys().len();
    let mut dist = vec![0.0; n.max(k)];
    for alt in tree.alternatives_of_key(key) {
        for (slot, p) in dist.iter_mut().zip(alternative_rank_dist(tree, alt)?) {
            *slot += p;
        }
    }
    Ok(RankProfile::from_dist(key, k, dist))
}

/// Rank profiles of every key, in key order.
pub fn rank_profiles(tree: &AndXorTree, k: usize) -> Result<Vec<RankProfile>> {
    tree.keys().iter().map(|key| rank_profile(tree, key, k)).collect()
}

fn distinct_pair(tree: &AndXorTree, a: &str, b: &str) -> Result<()> {
    if a == b {
        return Err(Error::SameKey(a.to_string()));
    }
    tree.require_key(a)?;
    tree.require_key(b)
}

/// `Pr(r(t_i) < r(t_j))`: `t_i` is present and `t_j` is absent or ranked
/// below it.
pub fn precedes_prob(tree: &AndXorTree, key_i: &str, key_j: &str) -> Result<f64> {
    distinct_pair(tree, key_i, key_j)?;
    tree.require_numeric()?;
    let mut total = 0.0;
    for alt in tree.alternatives_of_key(key_i) {
        let poly = expand(tree, &[1, 1], |_, leaf| {
            if leaf == alt {
                Some(0)
            } else if leaf.key == key_j && rank_cmp(leaf, alt).ok() == Some(Ordering::Less) {
                Some(1)
            } else {
                None
            }
        });
        total += poly.coeff(&[1, 0]);
    }
    Ok(total)
}

/// `Pr(t_i absent ∧ t_j absent)`.
pub fn both_absent_prob(tree: &AndXorTree, key_i: &str, key_j: &str) -> Result<f64> {
    distinct_pair(tree, key_i, key_j)?;
    let poly = expand(tree, &[1], |_, a| (a.key == key_i || a.key == key_j).then_some(0));
    Ok(poly.coeff(&[0]))
}

/// Probability that two keys fall in the same cluster: equal values, or
/// both absent (absent keys share one artificial cluster).
pub fn cocluster_prob(tree: &AndXorTree, key_i: &str, key_j: &str) -> Result<f64> {
    distinct_pair(tree, key_i, key_j)?;
    let mut total = both_absent_prob(tree, key_i, key_j)?;
    let values_j: Vec<_> = tree.alternatives_of_key(key_j).into_iter().map(|a| &a.value).collect();
    for alt in tree.alternatives_of_key(key_i) {
        if !values_j.contains(&&alt.value) {
            continue;
        }
        let poly = expand(tree, &[2], |_, a| {
            ((a.key == key_i || a.key == key_j) && a.value == alt.value).then_some(0)
        });
        total += poly.coeff(&[2]);
    }
    Ok(total)
}
