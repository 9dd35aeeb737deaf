//! Bi-objective tampering problem: impact `Z1` (throughput lost against the
//! optimal control) versus noticeability `Z2` (conflict decisions changed).
//!
//! [`pareto_frontier`] enumerates every extreme supported nondominated point
//! by recursive weighted-sum solves over segments of the frontier, seeded
//! with the two lexicographic endpoints. [`brute_force_frontier`] computes
//! the same set by exhaustive enumeration on small instances.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{infer_signal_schedule, ControlError, OptimalSolution, SignalSchedule};
use crate::flow::{
    check_feasible, solve_min_cost, CostVector, FeasibilityError, FlowSolver, IntegralFlow,
    SolverError,
};
use crate::oracle::{enumerate_flows, OracleError};
use crate::supergraph::SuperGraph;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("optimal conflict flow on arc {arc} is {value}, expected 0 or 1")]
    NonBinaryConflict { arc: usize, value: i64 },
    #[error("conflict arc {arc} has capacity {capacity}; noticeability needs unit gadgets")]
    NonUnitGadget { arc: usize, capacity: i64 },
    #[error("optimal solution does not belong to this graph")]
    MismatchedSolution,
    #[error("witness is infeasible: {0}")]
    InfeasibleWitness(#[from] FeasibilityError),
    #[error(
        "objective value {solver} from the solver disagrees with {direct} recomputed from flows"
    )]
    Inconsistent { solver: i128, direct: i128 },
}

/// Objectives as arc costs plus constants:
/// `Z1(x) = z1_costsᵀx + z1_const`, `Z2(x) = z2_costsᵀx + z2_const`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveEncoding {
    pub z1_costs: CostVector,
    pub z1_const: i128,
    pub z2_costs: CostVector,
    pub z2_const: i128,
}

impl ObjectiveEncoding {
    pub fn z1(&self, flow: &[i64]) -> i128 {
        self.z1_costs.dot(flow) + self.z1_const
    }

    pub fn z2(&self, flow: &[i64]) -> i128 {
        self.z2_costs.dot(flow) + self.z2_const
    }
}

/// Encodes both objectives relative to `opt`.
///
/// Conflict flows are binary on unit gadgets, so the distance
/// `‖x_conf - x_conf*‖₁` equals `Σ_{x*=1} (1 - x) + Σ_{x*=0} x`, which is
/// linear in `x`.
pub fn encode_objectives(
    opt: &OptimalSolution,
    g: &SuperGraph,
) -> Result<ObjectiveEncoding, AdversaryError> {
    if opt.flow.flow.len() != g.arc_count()
        || opt.sink_flows.len() != g.sink_arcs().len()
        || opt.conflict_flows.len() != g.conflict_arcs().len()
    {
        return Err(AdversaryError::MismatchedSolution);
    }
    let m = g.arc_count();
    let mut z1_costs = CostVector::zeros(m);
    for &a in g.sink_arcs() {
        z1_costs.set(a, 1);
    }
    let z1_const = -(opt.sink_flows.iter().map(|&x| x as i128).sum::<i128>());

    let mut z2_costs = CostVector::zeros(m);
    let mut z2_const = 0i128;
    for (&a, &x) in g.conflict_arcs().iter().zip(&opt.conflict_flows) {
        if g.capacity(a) > 1 {
            return Err(AdversaryError::NonUnitGadget {
                arc: a,
                capacity: g.capacity(a),
            });
        }
        match x {
            0 => z2_costs.set(a, 1),
            1 => {
                z2_costs.set(a, -1);
                z2_const += 1;
            }
            _ => return Err(AdversaryError::NonBinaryConflict { arc: a, value: x }),
        }
    }
    Ok(ObjectiveEncoding {
        z1_costs,
        z1_const,
        z2_costs,
        z2_const,
    })
}

/// `Z1` straight from its definition: total sink flow minus the optimum's.
pub fn impact(flow: &[i64], opt: &OptimalSolution, g: &SuperGraph) -> i64 {
    let now: i64 = g.sink_arcs().iter().map(|&a| flow[a]).sum();
    now - opt.throughput()
}

/// `Z2` straight from its definition: `‖x_conf - x_conf*‖₁`.
pub fn noticeability(flow: &[i64], opt: &OptimalSolution, g: &SuperGraph) -> i64 {
    g.conflict_arcs()
        .iter()
        .zip(&opt.conflict_flows)
        .map(|(&a, &x)| (flow[a] - x).abs())
        .sum()
}

/// Nonzero arc flows of a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub arcs: u32,
    pub nonzeros: Vec<(u32, i64)>,
}

impl Witness {
    pub fn from_dense(flow: &[i64]) -> Self {
        Self {
            arcs: flow.len() as u32,
            nonzeros: flow
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(a, &x)| (a as u32, x))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<i64> {
        let mut flow = vec![0; self.arcs as usize];
        for &(a, x) in &self.nonzeros {
            flow[a as usize] = x;
        }
        flow
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoPoint {
    /// Throughput deviation, `≤ 0`.
    pub z1: i64,
    /// Conflict decisions changed, `≥ 0`.
    pub z2: i64,
    pub witness: Witness,
    pub schedule: SignalSchedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Lexicographic minimum of impact, then noticeability.
    MinImpact,
    /// Lexicographic minimum of noticeability, then impact.
    MinNoticeability,
    Segment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    /// A new frontier point.
    Inserted,
    /// The endpoints coincide; the frontier is a single point.
    Degenerate,
    /// No point lies strictly below the segment; it is final.
    Confirmed,
}

/// One solve of the enumeration, in processing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub iteration: usize,
    pub kind: StepKind,
    /// Segment endpoints as `(z1, z2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment: Option<[(i64, i64); 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<(i64, i64)>,
    pub candidate: (i64, i64),
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoFrontier {
    /// Sorted by `z2` ascending, `z1` strictly decreasing.
    pub points: Vec<ParetoPoint>,
    pub provenance: Vec<ProvenanceEntry>,
}

impl ParetoFrontier {
    pub fn values(&self) -> Vec<(i64, i64)> {
        self.points.iter().map(|p| (p.z1, p.z2)).collect()
    }

    /// Largest impact magnitude on the frontier.
    pub fn max_impact(&self) -> i64 {
        self.points.iter().map(|p| p.z1.abs()).max().unwrap_or(0)
    }
}

/// Frontier enumeration settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontierOptions {
    /// Solve independent segments concurrently.
    pub parallel: bool,
    /// Stop after this many weighted solves; `None` runs to completion.
    pub max_solves: Option<usize>,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            max_solves: None,
        }
    }
}

struct Found {
    z1: i64,
    z2: i64,
    flow: Vec<i64>,
}

fn evaluate_found(
    flow: IntegralFlow,
    enc: &ObjectiveEncoding,
    opt: &OptimalSolution,
    g: &SuperGraph,
) -> Result<Found, AdversaryError> {
    let x = flow.flow;
    let z1 = impact(&x, opt, g);
    let z2 = noticeability(&x, opt, g);
    for (solver, direct) in [(enc.z1(&x), z1), (enc.z2(&x), z2)] {
        if solver != direct as i128 {
            return Err(AdversaryError::Inconsistent {
                solver,
                direct: direct as i128,
            });
        }
    }
    Ok(Found { z1, z2, flow: x })
}

/// `D·|T|`, the impact range bound used for lexicographic weighting.
fn impact_bound(g: &SuperGraph) -> i128 {
    (g.total_demand() as i128 * g.horizon().steps as i128).max(1)
}

fn noticeability_bound(g: &SuperGraph) -> i128 {
    (g.conflict_arcs().len() as i128).max(1)
}

fn segment_weights(r: (i64, i64), s: (i64, i64)) -> (i64, i64) {
    ((s.1 - r.1).abs(), (s.0 - r.0).abs())
}

fn solve_segment(
    solver: &mut FlowSolver,
    g: &SuperGraph,
    enc: &ObjectiveEncoding,
    opt: &OptimalSolution,
    w: (i64, i64),
) -> Result<Found, AdversaryError> {
    let primary = enc.z1_costs.weighted_sum(w.0, &enc.z2_costs, w.1)?;
    let flow = solver.solve_lexicographic(&primary, &enc.z1_costs, impact_bound(g))?;
    evaluate_found(flow, enc, opt, g)
}

/// Enumerates the extreme supported nondominated points.
pub fn pareto_frontier(
    g: &SuperGraph,
    opt: &OptimalSolution,
) -> Result<ParetoFrontier, AdversaryError> {
    pareto_frontier_with(g, opt, FrontierOptions::default())
}

pub fn pareto_frontier_with(
    g: &SuperGraph,
    opt: &OptimalSolution,
    options: FrontierOptions,
) -> Result<ParetoFrontier, AdversaryError> {
    let enc = encode_objectives(opt, g)?;
    let mut provenance = Vec::new();

    // Every solve starts from an earlier optimal basis. Within a generation
    // all segments start from the same snapshot, so the result does not
    // depend on whether they run concurrently.
    let mut solver = FlowSolver::new(g)?;
    let first = solver.solve_lexicographic(&enc.z1_costs, &enc.z2_costs, noticeability_bound(g))?;
    let first = evaluate_found(first, &enc, opt, g)?;
    provenance.push(ProvenanceEntry {
        iteration: 0,
        kind: StepKind::MinImpact,
        segment: None,
        weights: None,
        candidate: (first.z1, first.z2),
        outcome: StepOutcome::Inserted,
    });
    let second = solver.solve_lexicographic(&enc.z2_costs, &enc.z1_costs, impact_bound(g))?;
    let second = evaluate_found(second, &enc, opt, g)?;
    let degenerate = (first.z1, first.z2) == (second.z1, second.z2);
    provenance.push(ProvenanceEntry {
        iteration: 1,
        kind: StepKind::MinNoticeability,
        segment: None,
        weights: None,
        candidate: (second.z1, second.z2),
        outcome: if degenerate {
            StepOutcome::Degenerate
        } else {
            StepOutcome::Inserted
        },
    });

    let mut found = vec![second];
    if !degenerate {
        found.push(first);
        // Segments hold indices into `found`, low-noticeability end first.
        let mut queue: VecDeque<(usize, usize)> = VecDeque::from([(0, 1)]);
        let mut solves = 0usize;
        while !queue.is_empty() {
            // A whole generation of segments is independent; solving them
            // together and consuming the results in order is the same as
            // processing the queue one segment at a time.
            let mut batch: Vec<(usize, usize)> = queue.drain(..).collect();
            if let Some(limit) = options.max_solves {
                batch.truncate(limit.saturating_sub(solves));
                if batch.is_empty() {
                    break;
                }
            }
            solves += batch.len();
            let weights: Vec<(i64, i64)> = batch
                .iter()
                .map(|&(r, s)| {
                    segment_weights((found[r].z1, found[r].z2), (found[s].z1, found[s].z2))
                })
                .collect();
            let run = |&w: &(i64, i64)| {
                let mut local = solver.clone();
                solve_segment(&mut local, g, &enc, opt, w).map(|f| (f, local))
            };
            let results: Vec<Result<(Found, FlowSolver), AdversaryError>> = if options.parallel {
                weights.par_iter().map(run).collect()
            } else {
                weights.iter().map(run).collect()
            };
            let mut last = None;
            for ((&(r, s), &w), cand) in batch.iter().zip(&weights).zip(results) {
                let (cand, basis) = cand?;
                last = Some(basis);
                let rp = (found[r].z1, found[r].z2);
                let sp = (found[s].z1, found[s].z2);
                let cp = (cand.z1, cand.z2);
                let value = |p: (i64, i64)| w.0 as i128 * p.0 as i128 + w.1 as i128 * p.1 as i128;
                let below = value(cp) < value(rp);
                let outcome = if cp == rp || cp == sp || !below {
                    StepOutcome::Confirmed
                } else {
                    StepOutcome::Inserted
                };
                provenance.push(ProvenanceEntry {
                    iteration: provenance.len(),
                    kind: StepKind::Segment,
                    segment: Some([rp, sp]),
                    weights: Some(w),
                    candidate: cp,
                    outcome,
                });
                if outcome == StepOutcome::Inserted {
                    let k = found.len();
                    found.push(cand);
                    queue.push_back((r, k));
                    queue.push_back((k, s));
                }
            }
            if let Some(basis) = last {
                solver = basis;
            }
        }
    }

    found.sort_by_key(|f| (f.z2, f.z1));
    let points = found
        .into_iter()
        .map(|f| {
            let schedule = infer_signal_schedule(&f.flow, g)?;
            Ok(ParetoPoint {
                z1: f.z1,
                z2: f.z2,
                witness: Witness::from_dense(&f.flow),
                schedule,
            })
        })
        .collect::<Result<Vec<_>, AdversaryError>>()?;
    Ok(ParetoFrontier { points, provenance })
}

/// Extreme points of the lower-left convex hull of `pairs` given as
/// `(z1, z2)`; returned sorted by `z2` ascending.
pub fn extreme_nondominated(pairs: impl IntoIterator<Item = (i64, i64)>) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = pairs.into_iter().map(|(z1, z2)| (z2, z1)).collect();
    pts.sort_unstable();
    pts.dedup();
    // Nondominated: strictly decreasing z1 as z2 grows.
    let mut nd: Vec<(i64, i64)> = Vec::new();
    for p in pts {
        if nd.last().map_or(true, |q| p.1 < q.1) {
            nd.push(p);
        }
    }
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for p in nd {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.into_iter().map(|(z2, z1)| (z1, z2)).collect()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

/// Oracle result: extreme points plus enumeration statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceFrontier {
    /// `(z1, z2)` sorted by `z2` ascending.
    pub points: Vec<(i64, i64)>,
    pub achievable: BTreeSet<(i64, i64)>,
    pub flows: usize,
}

/// Exhaustive frontier: enumerates every feasible flow, evaluates both
/// objectives from their definitions, and keeps the extreme supported
/// nondominated pairs.
pub fn brute_force_frontier(
    g: &SuperGraph,
    opt: &OptimalSolution,
    limit: usize,
) -> Result<BruteForceFrontier, AdversaryError> {
    let mut achievable = BTreeSet::new();
    let flows = enumerate_flows(g, limit, |x| {
        achievable.insert((impact(x, opt, g), noticeability(x, opt, g)));
    })?;
    if achievable.is_empty() {
        return Err(OracleError::Infeasible.into());
    }
    let points = extreme_nondominated(achievable.iter().copied());
    Ok(BruteForceFrontier {
        points,
        achievable,
        flows,
    })
}

/// Recomputes `(z1, z2)` and the schedule from a witness's raw flows.
pub fn evaluate_attack(
    witness: &[i64],
    opt: &OptimalSolution,
    g: &SuperGraph,
) -> Result<(i64, i64, SignalSchedule), AdversaryError> {
    check_feasible(g, witness)?;
    let schedule = infer_signal_schedule(witness, g)?;
    Ok((
        impact(witness, opt, g),
        noticeability(witness, opt, g),
        schedule,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum AuditIssue {
    #[error("point {0} is out of order")]
    Unsorted(usize),
    #[error("point {0} duplicates its predecessor")]
    Duplicate(usize),
    #[error("point {0} is dominated by its predecessor")]
    Dominated(usize),
    #[error("point {0} is not in strictly convex position")]
    NotConvex(usize),
    #[error("witness of point {index} evaluates to ({z1}, {z2})")]
    WitnessMismatch { index: usize, z1: i64, z2: i64 },
    #[error("witness of point {0} is infeasible")]
    InfeasibleWitness(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub issues: Vec<AuditIssue>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks order, strict nondomination and convex position; with a graph and
/// optimum it also re-evaluates every witness.
pub fn frontier_audit(
    f: &ParetoFrontier,
    context: Option<(&SuperGraph, &OptimalSolution)>,
) -> AuditReport {
    let mut issues = Vec::new();
    let pts = f.values();
    for k in 1..pts.len() {
        let (p, q) = (pts[k - 1], pts[k]);
        if p == q {
            issues.push(AuditIssue::Duplicate(k));
        } else if q.1 < p.1 || (q.1 == p.1 && q.0 < p.0) {
            issues.push(AuditIssue::Unsorted(k));
        } else if q.0 >= p.0 {
            issues.push(AuditIssue::Dominated(k));
        }
    }
    for k in 1..pts.len().saturating_sub(1) {
        let o = (pts[k - 1].1, pts[k - 1].0);
        let a = (pts[k].1, pts[k].0);
        let b = (pts[k + 1].1, pts[k + 1].0);
        if cross(o, a, b) <= 0 {
            issues.push(AuditIssue::NotConvex(k));
        }
    }
    if let Some((g, opt)) = context {
        for (k, p) in f.points.iter().enumerate() {
            let x = p.witness.to_dense();
            if x.len() != g.arc_count() || check_feasible(g, &x).is_err() {
                issues.push(AuditIssue::InfeasibleWitness(k));
                continue;
            }
            let (z1, z2) = (impact(&x, opt, g), noticeability(&x, opt, g));
            if (z1, z2) != (p.z1, p.z2) {
                issues.push(AuditIssue::WitnessMismatch { index: k, z1, z2 });
            }
        }
    }
    AuditReport { issues }
}

/// Result of re-solving one frontier segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportCheck {
    pub segment: usize,
    pub weights: (i64, i64),
    pub optimum: i128,
    /// Weighted values of the two endpoints.
    pub endpoints: (i128, i128),
}

impl SupportCheck {
    pub fn holds(&self) -> bool {
        self.endpoints.0 == self.optimum && self.endpoints.1 == self.optimum
    }
}

/// Re-solves `min w1·Z1 + w2·Z2` for each pair of consecutive points and
/// reports the optimum next to both endpoints' values. A single-point
/// frontier is checked against both objectives separately.
pub fn recheck_weighted_support(
    f: &ParetoFrontier,
    g: &SuperGraph,
    opt: &OptimalSolution,
) -> Result<Vec<SupportCheck>, AdversaryError> {
    let enc = encode_objectives(opt, g)?;
    let value =
        |w: (i64, i64), p: &ParetoPoint| w.0 as i128 * p.z1 as i128 + w.1 as i128 * p.z2 as i128;
    let mut checks = Vec::new();
    if f.points.len() == 1 {
        let p = &f.points[0];
        for (k, w) in [(1, 0), (0, 1)].into_iter().enumerate() {
            let c = enc.z1_costs.weighted_sum(w.0, &enc.z2_costs, w.1)?;
            let sol = solve_min_cost(g, &c)?;
            let optimum = sol.objective() + w.0 as i128 * enc.z1_const + w.1 as i128 * enc.z2_const;
            checks.push(SupportCheck {
                segment: k,
                weights: w,
                optimum,
                endpoints: (value(w, p), value(w, p)),
            });
        }
        return Ok(checks);
    }
    for k in 0..f.points.len().saturating_sub(1) {
        let (r, s) = (&f.points[k], &f.points[k + 1]);
        let w = segment_weights((r.z1, r.z2), (s.z1, s.z2));
        let c = enc.z1_costs.weighted_sum(w.0, &enc.z2_costs, w.1)?;
        let sol = solve_min_cost(g, &c)?;
        let optimum = sol.objective() + w.0 as i128 * enc.z1_const + w.1 as i128 * enc.z2_const;
        checks.push(SupportCheck {
            segment: k,
            weights: w,
            optimum,
            endpoints: (value(w, r), value(w, s)),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::optimal_control;
    use crate::network::fixtures as nf;
    use crate::oracle::DEFAULT_LIMIT;
    use crate::supergraph::fixtures::{burst, crossing, crossing_with};
    use crate::supergraph::{expand, DemandProfile, Horizon, SinkCapacityPolicy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_demand_frontier_is_origin() {
        let net = nf::crossing();
        let g = expand(
            &net,
            Horizon::new(3, 1.0),
            &DemandProfile::default(),
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        assert_eq!(f.values(), vec![(0, 0)]);
        let bf = brute_force_frontier(&g, &opt, DEFAULT_LIMIT).unwrap();
        assert_eq!(bf.points, vec![(0, 0)]);
    }

    #[test]
    fn optimum_evaluates_to_origin() {
        let g = crossing(5, 2);
        let opt = optimal_control(&g).unwrap();
        let enc = encode_objectives(&opt, &g).unwrap();
        assert_eq!(enc.z1(&opt.flow.flow), 0);
        assert_eq!(enc.z2(&opt.flow.flow), 0);
        let (z1, z2, sched) = evaluate_attack(&opt.flow.flow, &opt, &g).unwrap();
        assert_eq!((z1, z2), (0, 0));
        assert_eq!(sched, opt.schedule);
    }

    #[test]
    fn zero_conflict_optimum_charges_every_conflict_arc() {
        let net = nf::crossing();
        let g = expand(
            &net,
            Horizon::new(3, 1.0),
            &DemandProfile::default(),
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let opt = optimal_control(&g).unwrap();
        let enc = encode_objectives(&opt, &g).unwrap();
        assert!(g.conflict_arcs().iter().all(|&a| enc.z2_costs.get(a) == 1));
        assert_eq!(enc.z2_const, 0);
    }

    #[test]
    fn linearization_is_exact_on_random_binary_vectors() {
        let g = crossing(6, 2);
        let opt = optimal_control(&g).unwrap();
        let enc = encode_objectives(&opt, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let mut x = vec![0; g.arc_count()];
            let mut l0 = 0;
            for (&a, &star) in g.conflict_arcs().iter().zip(&opt.conflict_flows) {
                x[a] = rng.gen_range(0..2);
                l0 += (x[a] != star) as i128;
            }
            assert_eq!(enc.z2(&x), noticeability(&x, &opt, &g) as i128);
            assert_eq!(enc.z2(&x), l0);
        }
    }

    #[test]
    fn flipping_one_grant_costs_two() {
        // Shift the first served vehicle by a step: one conflict arc goes
        // 1 -> 0 and another 0 -> 1.
        let g = crossing(6, 1);
        let opt = optimal_control(&g).unwrap();
        let mut flipped = None;
        enumerate_flows(&g, DEFAULT_LIMIT, |x| {
            let z2 = noticeability(x, &opt, &g);
            let served: i64 = g.conflict_arcs().iter().map(|&a| x[a]).sum();
            if flipped.is_none() && z2 == 2 && served == opt.conflict_flows.iter().sum::<i64>() {
                flipped = Some(x.to_vec());
            }
        })
        .unwrap();
        let x = flipped.unwrap();
        let enc = encode_objectives(&opt, &g).unwrap();
        assert_eq!(enc.z2(&x), 2);
    }

    #[test]
    fn crossing_toy_matches_oracle() {
        // Single-vehicle receiving cells: holding a vehicle blocks the next
        // one, so extra loss needs changed decisions.
        let g = crossing_with(1, 6, 2);
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let bf = brute_force_frontier(&g, &opt, DEFAULT_LIMIT).unwrap();
        assert_eq!(f.values(), bf.points);
        assert_eq!(f.values(), vec![(-2, 0), (-4, 2)]);
        assert!(frontier_audit(&f, Some((&g, &opt))).is_clean());
        assert!(recheck_weighted_support(&f, &g, &opt)
            .unwrap()
            .iter()
            .all(SupportCheck::holds));
    }

    #[test]
    fn hand_enumerated_two_step_instance() {
        // One vehicle per approach, two steps. The optimum serves one
        // vehicle at step 0 and it exits from its sink cell at step 1. It
        // may instead stay in that cell to the end, which loses the exit
        // without touching the gadget. The other vehicle cannot reach a
        // sink in time under any schedule.
        let g = crossing(2, 1);
        let opt = optimal_control(&g).unwrap();
        assert_eq!(opt.throughput(), 1);
        let bf = brute_force_frontier(&g, &opt, DEFAULT_LIMIT).unwrap();
        assert_eq!(
            bf.achievable.iter().copied().collect::<Vec<_>>(),
            vec![(-1, 0), (-1, 1), (-1, 2), (0, 0), (0, 1)]
        );
        assert_eq!(bf.points, vec![(-1, 0)]);
        let f = pareto_frontier(&g, &opt).unwrap();
        assert_eq!(f.values(), bf.points);
    }

    #[test]
    fn larger_toy_matches_oracle() {
        let g = crossing_with(1, 8, 3);
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let bf = brute_force_frontier(&g, &opt, 5_000_000).unwrap();
        assert_eq!(f.values(), bf.points);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = crossing(8, 3);
        let opt = optimal_control(&g).unwrap();
        let a = pareto_frontier_with(
            &g,
            &opt,
            FrontierOptions {
                parallel: false,
                max_solves: None,
            },
        )
        .unwrap();
        let b = pareto_frontier_with(
            &g,
            &opt,
            FrontierOptions {
                parallel: true,
                max_solves: None,
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn audit_flags_injected_points() {
        let g = crossing_with(1, 6, 2);
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let mut dup = f.clone();
        dup.points.insert(1, dup.points[0].clone());
        assert!(dup_has(&frontier_audit(&dup, None), |i| matches!(
            i,
            AuditIssue::Duplicate(_)
        )));

        let mut dom = f.clone();
        let mut p = dom.points[0].clone();
        p.z2 += 1;
        dom.points.insert(1, p);
        assert!(dup_has(&frontier_audit(&dom, None), |i| matches!(
            i,
            AuditIssue::Dominated(_)
        )));

        let mut bad = f.clone();
        bad.points[0].z1 -= 1;
        assert!(dup_has(
            &frontier_audit(&bad, Some((&g, &opt))),
            |i| matches!(i, AuditIssue::WitnessMismatch { .. })
        ));
    }

    fn dup_has(r: &AuditReport, f: impl Fn(&AuditIssue) -> bool) -> bool {
        r.issues.iter().any(f)
    }

    #[test]
    fn extreme_points_drop_collinear_and_dominated() {
        let pts = [(0, 0), (-2, 1), (-4, 2), (-5, 4), (-1, 3), (-5, 6)];
        assert_eq!(extreme_nondominated(pts), vec![(0, 0), (-4, 2), (-5, 4)]);
    }

    #[test]
    fn non_binary_optimum_is_rejected() {
        let g = crossing(4, 1);
        let mut opt = optimal_control(&g).unwrap();
        opt.conflict_flows[0] = 2;
        assert!(matches!(
            encode_objectives(&opt, &g),
            Err(AdversaryError::NonBinaryConflict { value: 2, .. })
        ));
    }

    #[test]
    fn witness_round_trip() {
        let x = vec![0, 3, 0, 0, 1];
        assert_eq!(Witness::from_dense(&x).to_dense(), x);
    }

    #[test]
    fn held_vehicles_show_up_at_zero_noticeability() {
        // Two staggered vehicles on one approach: with signals unchanged the
        // second one can still be held back in its source cell.
        let net = nf::crossing();
        let mut d = burst(&net, 0, 5);
        d.arrivals.get_mut("w").unwrap()[..2].copy_from_slice(&[1, 1]);
        let g = expand(
            &net,
            Horizon::new(5, 1.0),
            &d,
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let bf = brute_force_frontier(&g, &opt, DEFAULT_LIMIT).unwrap();
        assert_eq!(f.values(), bf.points);
        assert_eq!(f.points[0].z2, 0);
    }
}
