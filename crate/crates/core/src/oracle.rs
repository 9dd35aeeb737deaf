//! Exhaustive enumeration of feasible integral flows on small acyclic
//! networks. Used as a verification oracle for the solver and the frontier.

use std::collections::VecDeque;

use thiserror::Error;

use crate::flow::{CostVector, FlowGraph};

/// Default cap on enumerated flows.
pub const DEFAULT_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has more than {0} feasible flows")]
    TooLarge(usize),
    #[error("graph is not acyclic")]
    Cyclic,
    #[error("instance has no feasible flow")]
    Infeasible,
}

struct Enumerator<'a, F> {
    order: Vec<usize>,
    out: Vec<Vec<usize>>,
    heads: Vec<usize>,
    caps: Vec<i64>,
    supply: Vec<i64>,
    inflow: Vec<i64>,
    flow: Vec<i64>,
    count: usize,
    limit: usize,
    visit: &'a mut F,
}

impl<F: FnMut(&[i64])> Enumerator<'_, F> {
    fn node(&mut self, pos: usize) -> Result<(), OracleError> {
        if pos == self.order.len() {
            self.count += 1;
            if self.count > self.limit {
                return Err(OracleError::TooLarge(self.limit));
            }
            (self.visit)(&self.flow);
            return Ok(());
        }
        let v = self.order[pos];
        let avail = self.supply[v] + self.inflow[v];
        if avail < 0 {
            return Ok(());
        }
        if self.out[v].is_empty() {
            // Only a node with no outgoing arcs can absorb demand.
            return if avail == 0 {
                self.node(pos + 1)
            } else {
                Ok(())
            };
        }
        self.split(pos, v, 0, avail)
    }

    fn split(&mut self, pos: usize, v: usize, k: usize, remaining: i64) -> Result<(), OracleError> {
        let a = self.out[v][k];
        if k + 1 == self.out[v].len() {
            if remaining > self.caps[a] {
                return Ok(());
            }
            return self.assign(a, remaining, |s| s.node(pos + 1));
        }
        let rest: i64 = self.out[v][k + 1..].iter().map(|&b| self.caps[b]).sum();
        let lo = (remaining - rest).max(0);
        let hi = remaining.min(self.caps[a]);
        for x in lo..=hi {
            self.assign(a, x, |s| s.split(pos, v, k + 1, remaining - x))?;
        }
        Ok(())
    }

    fn assign(
        &mut self,
        a: usize,
        x: i64,
        next: impl FnOnce(&mut Self) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        let h = self.heads[a];
        self.flow[a] = x;
        self.inflow[h] += x;
        let r = next(self);
        self.inflow[h] -= x;
        self.flow[a] = 0;
        r
    }
}

/// Calls `visit` once for every feasible integral flow. Returns the number
/// of flows visited, or [`OracleError::TooLarge`] once `limit` is exceeded.
pub fn enumerate_flows<G: FlowGraph + ?Sized>(
    g: &G,
    limit: usize,
    mut visit: impl FnMut(&[i64]),
) -> Result<usize, OracleError> {
    let n = g.node_count();
    let m = g.arc_count();
    let mut out = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for a in 0..m {
        out[g.tail(a)].push(a);
        indeg[g.head(a)] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &a in &out[v] {
            let h = g.head(a);
            indeg[h] -= 1;
            if indeg[h] == 0 {
                queue.push_back(h);
            }
        }
    }
    if order.len() < n {
        return Err(OracleError::Cyclic);
    }
    let mut e = Enumerator {
        order,
        out,
        heads: (0..m).map(|a| g.head(a)).collect(),
        caps: (0..m).map(|a| g.capacity(a)).collect(),
        supply: (0..n).map(|v| g.supply(v)).collect(),
        inflow: vec![0; n],
        flow: vec![0; m],
        count: 0,
        limit,
        visit: &mut visit,
    };
    e.node(0)?;
    Ok(e.count)
}

/// Minimum of `cᵀx` over all feasible flows, with the first minimizer found.
pub fn brute_force_min_cost<G: FlowGraph + ?Sized>(
    g: &G,
    c: &CostVector,
    limit: usize,
) -> Result<(i128, Vec<i64>), OracleError> {
    let mut best: Option<(i128, Vec<i64>)> = None;
    enumerate_flows(g, limit, |x| {
        let v = c.dot(x);
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, x.to_vec()));
        }
    })?;
    best.ok_or(OracleError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::ArcList;

    #[test]
    fn counts_two_parallel_paths() {
        // 0 -> 1 -> 3, 0 -> 2 -> 3, two units, unit-ish capacities.
        let g = ArcList::new(vec![2, 0, 0, -2])
            .arc(0, 1, 2)
            .arc(0, 2, 1)
            .arc(1, 3, 2)
            .arc(2, 3, 2);
        let mut flows = Vec::new();
        let n = enumerate_flows(&g, 100, |x| flows.push(x.to_vec())).unwrap();
        assert_eq!(n, 2);
        assert!(flows.contains(&vec![2, 0, 2, 0]));
        assert!(flows.contains(&vec![1, 1, 1, 1]));
    }

    #[test]
    fn limit_is_enforced() {
        let mut g = ArcList::new(vec![5, -5]);
        for _ in 0..6 {
            g = g.arc(0, 1, 5);
        }
        assert_eq!(
            enumerate_flows(&g, 10, |_| {}),
            Err(OracleError::TooLarge(10))
        );
    }

    #[test]
    fn infeasible_instance_has_no_flows() {
        let g = ArcList::new(vec![3, -3]).arc(0, 1, 2);
        assert_eq!(enumerate_flows(&g, 10, |_| {}), Ok(0));
        let c = CostVector::zeros(1);
        assert_eq!(
            brute_force_min_cost(&g, &c, 10),
            Err(OracleError::Infeasible)
        );
    }
}
