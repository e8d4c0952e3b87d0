//! Probabilistic and/xor trees.
//!
//! Leaves are tuple alternatives `(key, value)`. An OR node picks at most one
//! child (child `v` with probability `Pr(u, v)`, nothing with the residual
//! mass), an AND node takes the union of all of its children. Two leaves that
//! share a key must meet at an OR node, so no possible world ever holds two
//! alternatives of one key.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance used for every "exact" probability comparison.
pub const PROB_TOL: f64 = 1e-9;

pub type LeafId = usize;
pub type NodeId = usize;

/// Attribute value of a tuple alternative: a score or a categorical label.
#[derive(Clone, Debug)]
pub enum Value {
    Number(f64),
    Label(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Label(_) => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Number(_), Value::Label(_)) => Ordering::Less,
            (Value::Label(_), Value::Number(_)) => Ordering::Greater,
            (Value::Label(a), Value::Label(b)) => a.cmp(b),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Number(x) => {
                0u8.hash(state);
                x.to_bits().hash(state);
            }
            Value::Label(s) => {
                1u8.hash(state);
                s.hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Label(s.to_string())
    }
}

/// One `(key, value)` realization of an uncertain tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TupleAlternative {
    pub key: String,
    pub value: Value,
}

impl TupleAlternative {
    pub fn new(key: impl Into<String>, value: impl Into<Value>) -> Self {
        TupleAlternative {
            key: key.into(),
            value: value.into(),
        }
    }

    pub fn score(&self) -> Option<f64> {
        self.value.as_number()
    }
}

impl fmt::Display for TupleAlternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.key, self.value)
    }
}

/// Total ranking order over scored alternatives: higher score first, equal
/// scores broken by the lexicographically smaller key. `Less` means `a`
/// ranks above `b`.
pub fn rank_cmp(a: &TupleAlternative, b: &TupleAlternative) -> Result<Ordering> {
    let sa = a.score().ok_or_else(|| Error::NonNumericValue(a.key.clone()))?;
    let sb = b.score().ok_or_else(|| Error::NonNumericValue(b.key.clone()))?;
    Ok(sb.total_cmp(&sa).then_with(|| a.key.cmp(&b.key)))
}

/// Recursive form of an and/xor tree, used to build and serialize trees.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Leaf(TupleAlternative),
    And(Vec<Node>),
    Or(Vec<(f64, Node)>),
}

impl Node {
    pub fn leaf(key: impl Into<String>, value: impl Into<Value>) -> Node {
        Node::Leaf(TupleAlternative::new(key, value))
    }

    pub fn and(children: Vec<Node>) -> Node {
        Node::And(children)
    }

    pub fn or(children: Vec<(f64, Node)>) -> Node {
        Node::Or(children)
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Flat {
    Leaf(LeafId),
    And(Vec<NodeId>),
    Or {
        children: Vec<(f64, NodeId)>,
        residual: f64,
    },
}

/// Mass of the "nothing" outcome at an OR node. Residuals within
/// [`PROB_TOL`] of zero are snapped to zero so that numerically complete
/// OR nodes do not produce a phantom empty world.
pub fn or_residual(probs: impl IntoIterator<Item = f64>) -> f64 {
    let r = 1.0 - probs.into_iter().sum::<f64>();
    if r <= PROB_TOL {
        0.0
    } else {
        r
    }
}

/// An immutable probabilistic and/xor tree.
///
/// Nodes are stored flattened in pre-order (the root has id 0) and leaves are
/// numbered in the same order, so the leaves of any subtree form a contiguous
/// id range.
#[derive(Clone, Debug)]
pub struct AndXorTree {
    root: Node,
    flat: Vec<Flat>,
    parent: Vec<Option<NodeId>>,
    paths: Vec<String>,
    ranges: Vec<(LeafId, LeafId)>,
    leaves: Vec<TupleAlternative>,
    leaf_node: Vec<NodeId>,
    keys: Vec<String>,
    alternatives: Vec<TupleAlternative>,
}

impl AndXorTree {
    /// Builds and validates a tree.
    pub fn new(root: Node) -> Result<Self> {
        let tree = Self::unchecked(root);
        let report = tree.validate();
        if report.is_valid() {
            Ok(tree)
        } else {
            Err(Error::InvalidTree(report))
        }
    }

    /// Builds a tree without checking the probability and key constraints.
    /// Every algorithm in this crate assumes a valid tree.
    pub fn unchecked(root: Node) -> Self {
        let mut tree = AndXorTree {
            root: Node::And(Vec::new()),
            flat: Vec::new(),
            parent: Vec::new(),
            paths: Vec::new(),
            ranges: Vec::new(),
            leaves: Vec::new(),
            leaf_node: Vec::new(),
            keys: Vec::new(),
            alternatives: Vec::new(),
        };
        tree.flatten(&root, None, "$".to_string());
        let keys: BTreeSet<&String> = tree.leaves.iter().map(|a| &a.key).collect();
        tree.keys = keys.into_iter().cloned().collect();
        let alts: BTreeSet<&TupleAlternative> = tree.leaves.iter().collect();
        tree.alternatives = alts.into_iter().cloned().collect();
        tree.root = root;
        tree
    }

    fn flatten(&mut self, node: &Node, parent: Option<NodeId>, path: String) -> NodeId {
        let id = self.flat.len();
        self.flat.push(Flat::And(Vec::new()));
        self.parent.push(parent);
        self.paths.push(path.clone());
        self.ranges.push((self.leaves.len(), self.leaves.len()));
        let flat = match node {
            Node::Leaf(alt) => {
                let leaf = self.leaves.len();
                self.leaves.push(alt.clone());
                self.leaf_node.push(id);
                Flat::Leaf(leaf)
            }
            Node::And(children) => Flat::And(
                children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| self.flatten(c, Some(id), format!("{path}.children[{i}]")))
                    .collect(),
            ),
            Node::Or(children) => {
                let ids: Vec<(f64, NodeId)> = children
                    .iter()
                    .enumerate()
                    .map(|(i, (p, c))| (*p, self.flatten(c, Some(id), format!("{path}.children[{i}]"))))
                    .collect();
                let residual = or_residual(ids.iter().map(|(p, _)| *p));
                Flat::Or {
                    children: ids,
                    residual,
                }
            }
        };
        self.flat[id] = flat;
        self.ranges[id].1 = self.leaves.len();
        id
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn leaves(&self) -> &[TupleAlternative] {
        &self.leaves
    }

    pub fn leaf(&self, id: LeafId) -> &TupleAlternative {
        &self.leaves[id]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Distinct keys, sorted.
    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// Distinct alternatives, sorted.
    pub fn alternatives(&self) -> &[TupleAlternative] {
        &self.alternatives
    }

    pub fn has_key(&self, key: &str) -> bool {
        self.keys.binary_search_by(|k| k.as_str().cmp(key)).is_ok()
    }

    pub fn require_key(&self, key: &str) -> Result<()> {
        if self.has_key(key) {
            Ok(())
        } else {
            Err(Error::UnknownKey(key.to_string()))
        }
    }

    pub fn leaves_of_key<'a>(&'a self, key: &'a str) -> impl Iterator<Item = LeafId> + 'a {
        self.leaves
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.key == key)
            .map(|(i, _)| i)
    }

    /// Distinct alternatives of `key`, sorted by value.
    pub fn alternatives_of_key(&self, key: &str) -> Vec<&TupleAlternative> {
        self.alternatives.iter().filter(|a| a.key == key).collect()
    }

    pub(crate) fn flat(&self, id: NodeId) -> &Flat {
        &self.flat[id]
    }

    /// Path of a node in `$.children[i]...` notation.
    pub fn node_path(&self, id: NodeId) -> &str {
        &self.paths[id]
    }

    /// Checks every scored leaf has a numeric value.
    pub fn require_numeric(&self) -> Result<()> {
        match self.leaves.iter().find(|a| a.score().is_none()) {
            Some(a) => Err(Error::NonNumericValue(a.key.clone())),
            None => Ok(()),
        }
    }

    /// Reports every violated structural constraint. An empty report means
    /// the tree is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        self.check(0, &mut violations);
        ValidationReport { violations }
    }

    fn check<'a>(&'a self, id: NodeId, out: &mut Vec<Violation>) -> BTreeSet<&'a str> {
        let path = &self.paths[id];
        match &self.flat[id] {
            Flat::Leaf(leaf) => {
                let alt = &self.leaves[*leaf];
                if alt.key.is_empty() {
                    out.push(Violation::new(path, ViolationKind::EmptyKey));
                }
                if let Value::Number(x) = alt.value {
                    if !x.is_finite() {
                        out.push(Violation::new(path, ViolationKind::NonFiniteScore(x)));
                    }
                }
                std::iter::once(alt.key.as_str()).collect()
            }
            Flat::And(children) => {
                // An empty AND is the empty relation; only meaningful at the root.
                if children.is_empty() && id != 0 {
                    out.push(Violation::new(path, ViolationKind::EmptyAnd));
                }
                let mut seen: BTreeSet<&str> = BTreeSet::new();
                let mut clashes: BTreeSet<&str> = BTreeSet::new();
                for &c in children {
                    for key in self.check(c, out) {
                        if !seen.insert(key) {
                            clashes.insert(key);
                        }
                    }
                }
                for key in clashes {
                    out.push(Violation::new(path, ViolationKind::KeyConstraint(key.to_string())));
                }
                seen
            }
            Flat::Or { children, .. } => {
                let mut sum = 0.0;
                let mut keys = BTreeSet::new();
                for &(p, c) in children {
                    if !(0.0..=1.0).contains(&p) {
                        out.push(Violation::new(path, ViolationKind::BadProbability(p)));
                    }
                    sum += p;
                    keys.extend(self.check(c, out));
                }
                if sum > 1.0 + PROB_TOL {
                    out.push(Violation::new(path, ViolationKind::ProbabilitySum(sum)));
                }
                keys
            }
        }
    }

    /// Every possible world with nonzero probability, as sets of leaf ids
    /// (leaf-level, before alternatives with equal `(key, value)` are merged).
    pub fn enumerate_leaf_sets(&self, limit: usize) -> Result<Vec<(Vec<LeafId>, f64)>> {
        let dist = self.leaf_dist(0, limit)?;
        Ok(dist.into_iter().collect())
    }

    fn leaf_dist(&self, id: NodeId, limit: usize) -> Result<BTreeMap<Vec<LeafId>, f64>> {
        let too_many = |reached: usize| Error::TooManyWorlds { reached, limit };
        match &self.flat[id] {
            Flat::Leaf(leaf) => Ok(BTreeMap::from([(vec![*leaf], 1.0)])),
            Flat::Or { children, residual } => {
                let mut out: BTreeMap<Vec<LeafId>, f64> = BTreeMap::new();
                if *residual > 0.0 {
                    out.insert(Vec::new(), *residual);
                }
                for &(p, c) in children {
                    if p <= 0.0 {
                        continue;
                    }
                    for (set, q) in self.leaf_dist(c, limit)? {
                        *out.entry(set).or_insert(0.0) += p * q;
                        if out.len() > limit {
                            return Err(too_many(out.len()));
                        }
                    }
                }
                Ok(out)
            }
            Flat::And(children) => {
                let mut acc: BTreeMap<Vec<LeafId>, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
                for &c in children {
                    let child = self.leaf_dist(c, limit)?;
                    let reached = acc.len().saturating_mul(child.len());
                    if reached > limit {
                        return Err(too_many(reached));
                    }
                    let mut next = BTreeMap::new();
                    for (a, pa) in &acc {
                        for (b, pb) in &child {
                            // Children own consecutive leaf-id ranges, so
                            // concatenation keeps the set sorted.
                            let mut set = a.clone();
                            set.extend_from_slice(b);
                            *next.entry(set).or_insert(0.0) += pa * pb;
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
        }
    }

    /// Every possible world with nonzero probability, exactly once. Worlds
    /// reached through different branches with the same alternatives are
    /// merged.
    pub fn enumerate_worlds(&self, limit: usize) -> Result<Vec<PossibleWorld>> {
        let mut merged: BTreeMap<Vec<TupleAlternative>, f64> = BTreeMap::new();
        for (set, p) in self.enumerate_leaf_sets(limit)? {
            *merged.entry(self.alternatives_of(&set)).or_insert(0.0) += p;
        }
        Ok(merged
            .into_iter()
            .map(|(alternatives, prob)| PossibleWorld { alternatives, prob })
            .collect())
    }

    pub(crate) fn alternatives_of(&self, leaves: &[LeafId]) -> Vec<TupleAlternative> {
        let mut alts: Vec<TupleAlternative> = leaves.iter().map(|&l| self.leaves[l].clone()).collect();
        alts.sort();
        alts
    }

    /// Draws one leaf set by running the generative process top-down.
    pub fn sample_leaves<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<LeafId> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            match &self.flat[id] {
                Flat::Leaf(leaf) => out.push(*leaf),
                Flat::And(children) => stack.extend(children.iter().rev()),
                Flat::Or { children, .. } => {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    for &(p, c) in children {
                        acc += p;
                        if u < acc {
                            stack.push(c);
                            break;
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Samples a world with a seeded generator. The returned probability is
    /// the exact probability of that world, not of the sampled path.
    pub fn sample_world(&self, seed: u64) -> PossibleWorld {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves = self.sample_leaves(&mut rng);
        let alternatives = self.alternatives_of(&leaves);
        let prob = crate::genfunc::world_probability(self, &alternatives);
        PossibleWorld { alternatives, prob }
    }

    /// `Pr(alt ∈ pw)`.
    pub fn marginal(&self, alt: &TupleAlternative) -> Result<f64> {
        if self.alternatives.binary_search(alt).is_err() {
            return Err(Error::UnknownAlternative {
                key: alt.key.clone(),
                value: alt.value.to_string(),
            });
        }
        Ok(crate::genfunc::presence_probability(self, |a| a == alt))
    }

    /// Whether the tree can produce exactly `world` with nonzero probability.
    pub fn is_possible_world(&self, world: &[TupleAlternative]) -> bool {
        let target: BTreeSet<&TupleAlternative> = world.iter().collect();
        if target.iter().any(|a| self.alternatives.binary_search(a).is_err()) {
            return false;
        }
        self.can_produce(0, &target)
    }

    /// Can the subtree at `id` produce exactly `target ∩ alts(id)`?
    fn can_produce(&self, id: NodeId, target: &BTreeSet<&TupleAlternative>) -> bool {
        match &self.flat[id] {
            Flat::Leaf(leaf) => target.contains(&self.leaves[*leaf]),
            Flat::And(children) => children.iter().all(|&c| self.can_produce(c, target)),
            Flat::Or { children, residual } => {
                let wanted: Vec<&TupleAlternative> =
                    target.iter().copied().filter(|a| self.subtree_has(id, a)).collect();
                if wanted.is_empty() && *residual > 0.0 {
                    return true;
                }
                children.iter().any(|&(p, c)| {
                    p > 0.0 && wanted.iter().all(|a| self.subtree_has(c, a)) && self.can_produce(c, target)
                })
            }
        }
    }

    fn subtree_has(&self, id: NodeId, alt: &TupleAlternative) -> bool {
        let (lo, hi) = self.leaf_range(id);
        self.leaves[lo..hi].iter().any(|a| a == alt)
    }

    /// Half-open leaf-id range covered by the subtree at `id`.
    pub(crate) fn leaf_range(&self, id: NodeId) -> (LeafId, LeafId) {
        self.ranges[id]
    }

    /// Views the tree as a block-independent disjoint relation: an AND root
    /// whose children are single-key blocks (an OR over leaves of one key,
    /// or a bare leaf). Returns `None` for any other shape.
    pub fn as_bid(&self) -> Option<Vec<BidBlock>> {
        let block = |id: NodeId| -> Option<BidBlock> {
            match &self.flat[id] {
                Flat::Leaf(l) => Some(BidBlock {
                    key: self.leaves[*l].key.clone(),
                    alternatives: vec![(self.leaves[*l].value.clone(), 1.0)],
                }),
                Flat::Or { children, .. } => {
                    let mut alternatives = Vec::new();
                    let mut key: Option<&str> = None;
                    for &(p, c) in children {
                        let Flat::Leaf(l) = self.flat[c] else {
                            return None;
                        };
                        let alt = &self.leaves[l];
                        match key {
                            Some(k) if k != alt.key => return None,
                            _ => key = Some(&alt.key),
                        }
                        alternatives.push((alt.value.clone(), p));
                    }
                    Some(BidBlock {
                        key: key?.to_string(),
                        alternatives,
                    })
                }
                Flat::And(_) => None,
            }
        };
        let blocks: Vec<BidBlock> = match &self.flat[0] {
            Flat::And(children) => children.iter().map(|&c| block(c)).collect::<Option<_>>()?,
            _ => vec![block(0)?],
        };
        let keys: BTreeSet<&str> = blocks.iter().map(|b| b.key.as_str()).collect();
        (keys.len() == blocks.len()).then_some(blocks)
    }

    /// BID with exactly one alternative per key.
    pub fn is_tuple_independent(&self) -> bool {
        self.as_bid()
            .is_some_and(|blocks| blocks.iter().all(|b| b.alternatives.len() == 1))
    }
}

/// One key of a block-independent disjoint relation.
#[derive(Clone, Debug, PartialEq)]
pub struct BidBlock {
    pub key: String,
    pub alternatives: Vec<(Value, f64)>,
}

/// A row `(key, value, prob)` of a BID table.
#[derive(Clone, Debug, PartialEq)]
pub struct BidRow {
    pub key: String,
    pub value: Value,
    pub prob: f64,
}

impl BidRow {
    pub fn new(key: impl Into<String>, value: impl Into<Value>, prob: f64) -> Self {
        BidRow {
            key: key.into(),
            value: value.into(),
            prob,
        }
    }
}

/// Builds the and/xor tree of a BID table: an AND root with one OR block per
/// distinct key, in order of first appearance.
pub fn from_bid(rows: &[BidRow]) -> Result<AndXorTree> {
    let mut order: Vec<&str> = Vec::new();
    let mut blocks: BTreeMap<&str, Vec<(f64, Node)>> = BTreeMap::new();
    let mut seen: BTreeSet<(&str, &Value)> = BTreeSet::new();
    for row in rows {
        if row.key.is_empty() {
            return Err(Error::Bid("empty key".into()));
        }
        if !(0.0..=1.0).contains(&row.prob) {
            return Err(Error::Bid(format!(
                "probability {} of ({}, {}) is outside [0, 1]",
                row.prob, row.key, row.value
            )));
        }
        if !seen.insert((&row.key, &row.value)) {
            return Err(Error::Bid(format!(
                "duplicate alternative ({}, {})",
                row.key, row.value
            )));
        }
        let block = blocks.entry(&row.key).or_insert_with(|| {
            order.push(&row.key);
            Vec::new()
        });
        block.push((
            row.prob,
            Node::Leaf(TupleAlternative::new(row.key.clone(), row.value.clone())),
        ));
    }
    let mut children = Vec::with_capacity(order.len());
    for key in order {
        let block = blocks.remove(key).unwrap_or_default();
        let sum: f64 = block.iter().map(|(p, _)| p).sum();
        if sum > 1.0 + PROB_TOL {
            return Err(Error::Bid(format!("probabilities of key `{key}` sum to {sum} > 1")));
        }
        children.push(Node::Or(block));
    }
    AndXorTree::new(Node::And(children))
}

/// A deterministic relation drawn from the tree, with its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PossibleWorld {
    /// Sorted; no two share a key.
    pub alternatives: Vec<TupleAlternative>,
    pub prob: f64,
}

impl PossibleWorld {
    pub fn contains(&self, alt: &TupleAlternative) -> bool {
        self.alternatives.binary_search(alt).is_ok()
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    /// Keys of the `k` highest-ranked alternatives, best first.
    pub fn top_k(&self, k: usize) -> Result<Vec<String>> {
        top_k_of(&self.alternatives, k)
    }
}

/// Keys of the `k` best-ranked alternatives of a world, best first.
pub fn top_k_of(alts: &[TupleAlternative], k: usize) -> Result<Vec<String>> {
    let mut sorted: Vec<&TupleAlternative> = alts.iter().collect();
    let mut err = None;
    sorted.sort_by(|a, b| {
        rank_cmp(a, b).unwrap_or_else(|e| {
            err.get_or_insert(e);
            Ordering::Equal
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(sorted.into_iter().take(k).map(|a| a.key.clone()).collect())
}

/// Structural problem found by [`AndXorTree::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
}

impl Violation {
    fn new(path: &str, kind: ViolationKind) -> Self {
        Violation {
            path: path.to_string(),
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    /// OR child probabilities sum above one.
    ProbabilitySum(f64),
    /// An OR edge probability outside `[0, 1]`.
    BadProbability(f64),
    /// Two leaves with this key meet at an AND node.
    KeyConstraint(String),
    EmptyAnd,
    EmptyKey,
    NonFiniteScore(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::ProbabilitySum(s) => {
                write!(
                    f,
                    "{}: probability constraint violated, OR children sum to {s}",
                    self.path
                )
            }
            ViolationKind::BadProbability(p) => {
                write!(f, "{}: edge probability {p} outside [0, 1]", self.path)
            }
            ViolationKind::KeyConstraint(k) => write!(
                f,
                "{}: key constraint violated, leaves with key `{k}` meet at an AND node",
                self.path
            ),
            ViolationKind::EmptyAnd => write!(f, "{}: AND node without children", self.path),
            ViolationKind::EmptyKey => write!(f, "{}: leaf with empty key", self.path),
            ViolationKind::NonFiniteScore(x) => write!(f, "{}: non-finite value {x}", self.path),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// The correlated example relation with three possible worlds
/// `{(t3,6),(t2,5),(t1,1)}`, `{(t3,9),(t1,7),(t4,0)}`, `{(t3,8),(t4,4),(t5,3)}`
/// of probability .3, .3 and .4.
pub fn three_world_example() -> AndXorTree {
    let world = |alts: &[(&str, f64)]| Node::And(alts.iter().map(|(k, v)| Node::leaf(*k, *v)).collect());
    AndXorTree::new(Node::Or(vec![
        (0.3, world(&[("t3", 6.0), ("t2", 5.0), ("t1", 1.0)])),
        (0.3, world(&[("t3", 9.0), ("t1", 7.0), ("t4", 0.0)])),
        (0.4, world(&[("t3", 8.0), ("t4", 4.0), ("t5", 3.0)])),
    ]))
    .expect("example tree is valid")
}
