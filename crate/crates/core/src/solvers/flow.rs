//! Min-cost integral flow with lower bounds.
//!
//! Lower bounds are moved into node excesses, the required value is pinned by
//! a sink→source edge with bounds `[F, F]`, and a super source / super sink
//! pair carries the excesses. The resulting circulation problem is solved by
//! successive shortest paths: Bellman–Ford for the initial potentials (edge
//! costs may be negative), Dijkstra with reduced costs afterwards.

use crate::error::{Error, Result};
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub upper: i64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    pub node_count: usize,
    pub edges: Vec<FlowEdge>,
    pub source: usize,
    pub sink: usize,
    /// Net flow that must leave the source.
    pub required: i64,
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize, required: i64) -> Self {
        FlowNetwork {
            node_count,
            edges: Vec::new(),
            source,
            sink,
            required,
        }
    }

    /// Adds an edge and returns its index.
    pub fn add_edge(&mut self, from: usize, to: usize, lower: i64, upper: i64, cost: f64) -> usize {
        self.edges.push(FlowEdge {
            from,
            to,
            lower,
            upper,
            cost,
        });
        self.edges.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSolution {
    /// Flow on each edge of the input network, in insertion order.
    pub flow: Vec<i64>,
    pub total_cost: f64,
}

struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

struct Residual {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual {
            adj: vec![Vec::new(); n],
            arcs: Vec::new(),
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn solve_min_cost_flow(net: &FlowNetwork) -> Result<FlowSolution> {
    let n = net.node_count;
    if net.source >= n || net.sink >= n {
        return Err(Error::Internal("source or sink out of range".into()));
    }
    for (i, e) in net.edges.iter().enumerate() {
        if e.lower < 0 || e.lower > e.upper {
            return Err(Error::BadBounds {
                edge: i,
                lower: e.lower,
                upper: e.upper,
            });
        }
        if e.from >= n || e.to >= n {
            return Err(Error::Internal(format!("edge {i} has an endpoint out of range")));
        }
        if !e.cost.is_finite() {
            return Err(Error::Internal(format!("edge {i} has a non-finite cost")));
        }
    }
    if net.required < 0 {
        return Err(Error::Infeasible);
    }

    let ss = n;
    let tt = n + 1;
    let mut res = Residual::new(n + 2);
    let mut excess = vec![0i64; n];
    let mut arc_of = Vec::with_capacity(net.edges.len());
    for e in &net.edges {
        arc_of.push(res.add(e.from, e.to, e.upper - e.lower, e.cost));
        excess[e.to] += e.lower;
        excess[e.from] -= e.lower;
    }
    // sink → source edge with bounds [F, F]
    if net.source != net.sink {
        excess[net.source] += net.required;
        excess[net.sink] -= net.required;
    } else if net.required != 0 {
        return Err(Error::Infeasible);
    }
    let mut demand = 0;
    for (v, &x) in excess.iter().enumerate() {
        if x > 0 {
            res.add(ss, v, x, 0.0);
            demand += x;
        } else if x < 0 {
            res.add(v, tt, -x, 0.0);
        }
    }

    let mut potential = bellman_ford(&res)?;
    let mut sent = 0;
    while sent < demand {
        let (dist, prev) = dijkstra(&res, &potential, ss);
        if !dist[tt].is_finite() {
            return Err(Error::Infeasible);
        }
        for v in 0..res.adj.len() {
            if dist[v].is_finite() {
                potential[v] += dist[v];
            }
        }
        let mut push = demand - sent;
        let mut v = tt;
        while v != ss {
            let a = prev[v];
            push = push.min(res.arcs[a].cap);
            v = res.arcs[a ^ 1].to;
        }
        let mut v = tt;
        while v != ss {
            let a = prev[v];
            res.arcs[a].cap -= push;
            res.arcs[a ^ 1].cap += push;
            v = res.arcs[a ^ 1].to;
        }
        sent += push;
    }

    let flow: Vec<i64> = net
        .edges
        .iter()
        .zip(&arc_of)
        .map(|(e, &a)| e.lower + res.arcs[a ^ 1].cap)
        .collect();
    let total_cost = net.edges.iter().zip(&flow).map(|(e, &f)| e.cost * f as f64).sum();
    Ok(FlowSolution { flow, total_cost })
}

/// Shortest distances from a virtual root joined to every node by a zero
/// arc. Fails if a residual cycle has negative cost.
fn bellman_ford(res: &Residual) -> Result<Vec<f64>> {
    let n = res.adj.len();
    let mut dist = vec![0.0; n];
    for round in 0..=n {
        let mut changed = false;
        for u in 0..n {
            for &a in &res.adj[u] {
                let arc = &res.arcs[a];
                if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                    dist[arc.to] = dist[u] + arc.cost;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(dist);
        }
        if round == n {
            break;
        }
    }
    Err(Error::NegativeCycle)
}

fn dijkstra(res: &Residual, potential: &[f64], src: usize) -> (Vec<f64>, Vec<usize>) {
    let n = res.adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Dist(0.0), src)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &a in &res.adj[u] {
            let arc = &res.arcs[a];
            if arc.cap <= 0 || done[arc.to] {
                continue;
            }
            let reduced = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
            let nd = d + reduced;
            if nd < dist[arc.to] {
                dist[arc.to] = nd;
                prev[arc.to] = a;
                heap.push(Reverse((Dist(nd), arc.to)));
            }
        }
    }
    (dist, prev)
}
