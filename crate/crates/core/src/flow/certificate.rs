//! Independent optimality certificate for min-cost flows.
//!
//! A feasible flow is optimal iff its residual network has no negative
//! cycle, i.e. iff node potentials exist under which every residual arc has
//! a nonnegative reduced cost. The potentials are built here by a
//! label-correcting shortest-path pass that shares no code with the solver.

use std::collections::VecDeque;

use thiserror::Error;

use super::{CostVector, FlowGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeasibilityError {
    #[error("flow vector has {found} entries, graph has {expected} arcs")]
    Length { expected: usize, found: usize },
    #[error("arc {arc} carries {flow}, outside [0, {cap}]")]
    Bounds { arc: usize, flow: i64, cap: i64 },
    #[error("node {node} has imbalance {excess}")]
    Conservation { node: usize, excess: i128 },
}

/// Checks bounds and conservation against the node balances.
pub fn check_feasible<G: FlowGraph + ?Sized>(g: &G, flow: &[i64]) -> Result<(), FeasibilityError> {
    if flow.len() != g.arc_count() {
        return Err(FeasibilityError::Length {
            expected: g.arc_count(),
            found: flow.len(),
        });
    }
    let mut net = vec![0i128; g.node_count()];
    for (a, &x) in flow.iter().enumerate() {
        let cap = g.capacity(a);
        if x < 0 || x > cap {
            return Err(FeasibilityError::Bounds {
                arc: a,
                flow: x,
                cap,
            });
        }
        net[g.tail(a)] += x as i128;
        net[g.head(a)] -= x as i128;
    }
    for (v, &out) in net.iter().enumerate() {
        let excess = out - g.supply(v) as i128;
        if excess != 0 {
            return Err(FeasibilityError::Conservation { node: v, excess });
        }
    }
    Ok(())
}

/// True iff `flow` is feasible and no residual cycle has negative cost.
pub fn verify_optimality<G: FlowGraph + ?Sized>(g: &G, c: &CostVector, flow: &[i64]) -> bool {
    if c.len() != g.arc_count() || check_feasible(g, flow).is_err() {
        return false;
    }
    let n = g.node_count();
    // Residual adjacency in CSR form: (head, cost).
    let mut deg = vec![0usize; n + 1];
    for (a, &x) in flow.iter().enumerate() {
        if x < g.capacity(a) {
            deg[g.tail(a) + 1] += 1;
        }
        if x > 0 {
            deg[g.head(a) + 1] += 1;
        }
    }
    for v in 0..n {
        deg[v + 1] += deg[v];
    }
    let mut fill = deg.clone();
    let mut adj = vec![(0usize, 0i128); deg[n]];
    for (a, &x) in flow.iter().enumerate() {
        let (t, h, k) = (g.tail(a), g.head(a), c.get(a) as i128);
        if x < g.capacity(a) {
            adj[fill[t]] = (h, k);
            fill[t] += 1;
        }
        if x > 0 {
            adj[fill[h]] = (t, -k);
            fill[h] += 1;
        }
    }

    // FIFO Bellman-Ford from a virtual root joined to every node at cost 0.
    // A tentative shortest path with n or more arcs repeats a node, so it
    // closes a negative cycle.
    let mut dist = vec![0i128; n];
    let mut arcs_on_path = vec![0usize; n];
    let mut queued = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).collect();
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let dv = dist[v];
        for &(w, k) in &adj[deg[v]..deg[v + 1]] {
            let cand = dv + k;
            if cand < dist[w] {
                dist[w] = cand;
                arcs_on_path[w] = arcs_on_path[v] + 1;
                if arcs_on_path[w] >= n {
                    return false;
                }
                if !queued[w] {
                    queued[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    true
}
