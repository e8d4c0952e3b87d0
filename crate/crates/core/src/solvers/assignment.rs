//! Maximum-profit assignment of positions to distinct agents.
//!
//! Hungarian method on the `k × n` cost matrix `-profit`. Among optimal
//! matchings the lexicographically smallest position→agent vector is
//! returned: positions are fixed one at a time to the smallest agent that
//! still admits an optimal completion.

use crate::error::{Error, Result};

/// Profit of giving position `j` to agent `t` is `profit[t][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentInstance {
    profit: Vec<Vec<f64>>,
    positions: usize,
}

impl AssignmentInstance {
    /// `profit` is an `n × k` matrix (agents × positions).
    pub fn new(profit: Vec<Vec<f64>>, positions: usize) -> Result<Self> {
        for (agent, row) in profit.iter().enumerate() {
            if row.len() != positions {
                return Err(Error::Dimension {
                    expected: positions,
                    got: row.len(),
                });
            }
            if let Some(position) = row.iter().position(|p| !p.is_finite()) {
                return Err(Error::NonFiniteProfit { agent, position });
            }
        }
        if positions > profit.len() {
            return Err(Error::TooFewAgents {
                positions,
                agents: profit.len(),
            });
        }
        Ok(AssignmentInstance { profit, positions })
    }

    pub fn agents(&self) -> usize {
        self.profit.len()
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn profit(&self, agent: usize, position: usize) -> f64 {
        self.profit[agent][position]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `matching[j]` is the agent holding position `j`.
    pub matching: Vec<usize>,
    pub total_profit: f64,
}

pub fn solve_assignment(inst: &AssignmentInstance) -> Result<Assignment> {
    let k = inst.positions;
    let n = inst.agents();
    if k == 0 {
        return Ok(Assignment {
            matching: Vec::new(),
            total_profit: 0.0,
        });
    }
    let scale = inst.profit.iter().flatten().fold(1.0f64, |m, p| m.max(p.abs()));
    let tol = 1e-9 * scale * k as f64;

    let mut fixed: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    let (best, mut current) = hungarian(inst, &fixed, &used);
    for j in 0..k {
        let mut choice = current[j];
        for a in 0..current[j] {
            if used[a] {
                continue;
            }
            fixed.push(a);
            used[a] = true;
            let (value, rest) = hungarian(inst, &fixed, &used);
            if value >= best - tol {
                choice = a;
                current = rest;
                break;
            }
            fixed.pop();
            used[a] = false;
        }
        if fixed.len() == j {
            fixed.push(choice);
            used[choice] = true;
        }
    }
    let total_profit = fixed.iter().enumerate().map(|(j, &a)| inst.profit[a][j]).sum();
    Ok(Assignment {
        matching: fixed,
        total_profit,
    })
}

/// Optimal completion given the first `fixed.len()` positions. Returns the
/// total profit and the full position→agent vector.
fn hungarian(inst: &AssignmentInstance, fixed: &[usize], used: &[bool]) -> (f64, Vec<usize>) {
    let k = inst.positions;
    let rows: Vec<usize> = (fixed.len()..k).collect();
    let cols: Vec<usize> = (0..inst.agents()).filter(|&a| !used[a]).collect();
    let mut matching = fixed.to_vec();
    let mut total: f64 = fixed.iter().enumerate().map(|(j, &a)| inst.profit[a][j]).sum();
    if rows.is_empty() {
        return (total, matching);
    }
    let r = rows.len();
    let c = cols.len();
    let cost = |i: usize, j: usize| -inst.profit[cols[j - 1]][rows[i - 1]];
    // 1-indexed potentials; column 0 is a sentinel
    let mut u = vec![0.0; r + 1];
    let mut v = vec![0.0; c + 1];
    let mut p = vec![0usize; c + 1];
    let mut way = vec![0usize; c + 1];
    for i in 1..=r {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; c + 1];
        let mut done = vec![false; c + 1];
        loop {
            done[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=c {
                if done[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=c {
                if done[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut tail = vec![0; r];
    for j in 1..=c {
        if p[j] != 0 {
            tail[p[j] - 1] = cols[j - 1];
        }
    }
    for (i, &a) in tail.iter().enumerate() {
        total += inst.profit[a][rows[i]];
    }
    matching.extend(tail);
    (total, matching)
}
