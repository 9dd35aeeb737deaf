//! Exact integral minimum-cost flow and lexicographic solves.

mod certificate;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::supergraph::SuperGraph;
use simplex::{Cost, NetworkSimplex, Outcome};

pub use certificate::{check_feasible, verify_optimality, FeasibilityError};

/// Read access to a capacitated network with node balances.
pub trait FlowGraph {
    fn node_count(&self) -> usize;
    fn arc_count(&self) -> usize;
    fn tail(&self, a: usize) -> usize;
    fn head(&self, a: usize) -> usize;
    fn capacity(&self, a: usize) -> i64;
    /// Net supply; positive at sources.
    fn supply(&self, v: usize) -> i64;
}

impl FlowGraph for SuperGraph {
    fn node_count(&self) -> usize {
        SuperGraph::node_count(self)
    }
    fn arc_count(&self) -> usize {
        SuperGraph::arc_count(self)
    }
    fn tail(&self, a: usize) -> usize {
        SuperGraph::tail(self, a)
    }
    fn head(&self, a: usize) -> usize {
        SuperGraph::head(self, a)
    }
    fn capacity(&self, a: usize) -> i64 {
        SuperGraph::capacity(self, a)
    }
    fn supply(&self, v: usize) -> i64 {
        SuperGraph::supply(self, v)
    }
}

/// A plain arc list, handy for small hand-built instances.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArcList {
    pub supplies: Vec<i64>,
    pub arcs: Vec<(usize, usize, i64)>,
}

impl ArcList {
    pub fn new(supplies: Vec<i64>) -> Self {
        Self {
            supplies,
            arcs: Vec::new(),
        }
    }

    pub fn arc(mut self, tail: usize, head: usize, cap: i64) -> Self {
        self.arcs.push((tail, head, cap));
        self
    }
}

impl FlowGraph for ArcList {
    fn node_count(&self) -> usize {
        self.supplies.len()
    }
    fn arc_count(&self) -> usize {
        self.arcs.len()
    }
    fn tail(&self, a: usize) -> usize {
        self.arcs[a].0
    }
    fn head(&self, a: usize) -> usize {
        self.arcs[a].1
    }
    fn capacity(&self, a: usize) -> i64 {
        self.arcs[a].2
    }
    fn supply(&self, v: usize) -> i64 {
        self.supplies[v]
    }
}

/// Integer cost per arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostVector(pub Vec<i64>);

impl CostVector {
    pub fn zeros(arcs: usize) -> Self {
        Self(vec![0; arcs])
    }

    pub fn from_fn(arcs: usize, f: impl FnMut(usize) -> i64) -> Self {
        Self((0..arcs).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, a: usize) -> i64 {
        self.0[a]
    }

    pub fn set(&mut self, a: usize, c: i64) {
        self.0[a] = c;
    }

    /// `cᵀx` without overflow.
    pub fn dot(&self, flow: &[i64]) -> i128 {
        self.0
            .iter()
            .zip(flow)
            .map(|(&c, &x)| c as i128 * x as i128)
            .sum()
    }

    /// `Σ |c_a|·u_a`, a bound on `|cᵀx - cᵀx'|` over feasible flows.
    pub fn range_bound<G: FlowGraph + ?Sized>(&self, g: &G) -> i128 {
        self.0
            .iter()
            .enumerate()
            .map(|(a, &c)| (c as i128).abs() * g.capacity(a) as i128)
            .sum()
    }

    /// `w1·self + w2·other`, failing on `i64` overflow.
    pub fn weighted_sum(
        &self,
        w1: i64,
        other: &CostVector,
        w2: i64,
    ) -> Result<CostVector, SolverError> {
        if self.len() != other.len() {
            return Err(SolverError::CostLength {
                expected: self.len(),
                found: other.len(),
            });
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                a.checked_mul(w1)
                    .and_then(|x| b.checked_mul(w2).and_then(|y| x.checked_add(y)))
                    .ok_or(SolverError::Overflow)
            })
            .collect::<Result<Vec<_>, _>>()
            .map(CostVector)
    }
}

/// One integral feasible flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralFlow {
    pub flow: Vec<i64>,
    /// Objective values, in solve order: one for a plain solve, primary and
    /// secondary for a lexicographic one.
    pub objectives: Vec<i128>,
}

impl IntegralFlow {
    pub fn zero(arcs: usize) -> Self {
        Self {
            flow: vec![0; arcs],
            objectives: Vec::new(),
        }
    }

    pub fn value(&self, a: usize) -> i64 {
        self.flow[a]
    }

    pub fn objective(&self) -> i128 {
        self.objectives.first().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("no feasible flow satisfies the node balances")]
    Infeasible,
    #[error("cost vector has {found} entries, graph has {expected} arcs")]
    CostLength { expected: usize, found: usize },
    #[error("lexicographic bound must be positive, got {0}")]
    InvalidBound(i128),
    #[error("cost magnitudes exceed the supported integer range")]
    Overflow,
    #[error("node balances do not sum to zero")]
    Unbalanced,
}

/// Minimum-cost integral flow. Ties among optima are broken by the
/// deterministic pivot order, so identical inputs yield identical flows.
pub fn solve_min_cost<G: FlowGraph + ?Sized>(
    g: &G,
    c: &CostVector,
) -> Result<IntegralFlow, SolverError> {
    FlowSolver::new(g)?.solve(c)
}

#[derive(Clone)]
enum Basis {
    Narrow(NetworkSimplex<i64>),
    Wide(NetworkSimplex<i128>),
}

/// Network simplex that keeps its final basis between solves on one graph.
///
/// Each solve after the first reprices the previous optimal tree and
/// pivots from there, which is primal feasible for any cost vector. The
/// result depends on the solve history only through tie-breaking among
/// optima; a clone carries its basis with it.
#[derive(Clone)]
pub struct FlowSolver {
    tails: Vec<usize>,
    heads: Vec<usize>,
    caps: Vec<i64>,
    supply: Vec<i64>,
    basis: Option<Basis>,
}

impl FlowSolver {
    pub fn new<G: FlowGraph + ?Sized>(g: &G) -> Result<Self, SolverError> {
        let m = g.arc_count();
        let supply: Vec<i64> = (0..g.node_count()).map(|v| g.supply(v)).collect();
        if supply.iter().map(|&s| s as i128).sum::<i128>() != 0 {
            return Err(SolverError::Unbalanced);
        }
        Ok(Self {
            tails: (0..m).map(|a| g.tail(a)).collect(),
            heads: (0..m).map(|a| g.head(a)).collect(),
            caps: (0..m).map(|a| g.capacity(a)).collect(),
            supply,
            basis: None,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.tails.len()
    }

    /// Forgets the stored basis; the next solve starts cold.
    pub fn reset(&mut self) {
        self.basis = None;
    }

    pub fn is_warm(&self) -> bool {
        self.basis.is_some()
    }

    pub fn solve(&mut self, c: &CostVector) -> Result<IntegralFlow, SolverError> {
        let m = self.arc_count();
        if c.len() != m {
            return Err(SolverError::CostLength {
                expected: m,
                found: c.len(),
            });
        }
        let n = self.supply.len();
        // Every simple path costs less than the artificial arc. Potentials
        // and reduced costs stay within a small multiple of it.
        let max_c = c.0.iter().map(|&x| (x as i128).abs()).max().unwrap_or(0);
        let art = (max_c + 1) * (n as i128 + 1);
        let narrow = art.checked_mul(16).is_some_and(|v| v < i64::MAX as i128);
        if !narrow && art.checked_mul(16).is_none() {
            return Err(SolverError::Overflow);
        }
        let outcome = match (self.basis.take(), narrow) {
            (Some(Basis::Narrow(mut ns)), true) => {
                ns.reprice(&c.0, art as i64);
                finish(Basis::Narrow, ns)
            }
            (Some(Basis::Wide(mut ns)), _) => {
                let costs: Vec<i128> = c.0.iter().map(|&x| x as i128).collect();
                ns.reprice(&costs, art);
                finish(Basis::Wide, ns)
            }
            (_, true) => {
                let ns = NetworkSimplex::new(
                    n,
                    &self.tails,
                    &self.heads,
                    &self.caps,
                    &c.0,
                    &self.supply,
                    art as i64,
                );
                finish(Basis::Narrow, ns)
            }
            (_, false) => {
                let costs: Vec<i128> = c.0.iter().map(|&x| x as i128).collect();
                let ns = NetworkSimplex::new(
                    n,
                    &self.tails,
                    &self.heads,
                    &self.caps,
                    &costs,
                    &self.supply,
                    art,
                );
                finish(Basis::Wide, ns)
            }
        };
        let (flow, basis) = outcome.ok_or(SolverError::Infeasible)?;
        self.basis = Some(basis);
        let objective = c.dot(&flow);
        Ok(IntegralFlow {
            flow,
            objectives: vec![objective],
        })
    }

    /// [`solve_lexicographic`] on the stored basis.
    pub fn solve_lexicographic(
        &mut self,
        primary: &CostVector,
        secondary: &CostVector,
        bound_secondary_range: i128,
    ) -> Result<IntegralFlow, SolverError> {
        let combined = lexicographic_costs(primary, secondary, bound_secondary_range)?;
        let mut sol = self.solve(&combined)?;
        sol.objectives = vec![primary.dot(&sol.flow), secondary.dot(&sol.flow)];
        Ok(sol)
    }
}

fn finish<C: Cost>(
    wrap: fn(NetworkSimplex<C>) -> Basis,
    mut ns: NetworkSimplex<C>,
) -> Option<(Vec<i64>, Basis)> {
    match ns.run() {
        Outcome::Optimal => Some((ns.flows().to_vec(), wrap(ns))),
        Outcome::Infeasible => None,
    }
}

/// Cost vector `W·primary + secondary` with `W = bound + 1`.
pub fn lexicographic_costs(
    primary: &CostVector,
    secondary: &CostVector,
    bound_secondary_range: i128,
) -> Result<CostVector, SolverError> {
    if bound_secondary_range <= 0 {
        return Err(SolverError::InvalidBound(bound_secondary_range));
    }
    let w = i64::try_from(bound_secondary_range + 1).map_err(|_| SolverError::Overflow)?;
    primary.weighted_sum(w, secondary, 1)
}

/// Minimizes `secondary` among the minimizers of `primary`.
///
/// `bound_secondary_range` must bound `|secondaryᵀx - secondaryᵀx'|` over
/// all feasible `x, x'`; integrality of both objectives then makes the
/// combined weighting exact.
pub fn solve_lexicographic<G: FlowGraph + ?Sized>(
    g: &G,
    primary: &CostVector,
    secondary: &CostVector,
    bound_secondary_range: i128,
) -> Result<IntegralFlow, SolverError> {
    FlowSolver::new(g)?.solve_lexicographic(primary, secondary, bound_secondary_range)
}
