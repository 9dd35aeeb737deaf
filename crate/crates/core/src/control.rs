//! Travel-time optimal control, signal-schedule readout, and a switch-count
//! post-pass over alternate optima.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{solve_lexicographic, solve_min_cost, CostVector, IntegralFlow, SolverError};
use crate::network::{ConnectorRole, Endpoint};
use crate::supergraph::{ArcClass, SuperGraph};

/// Rounds of re-solving attempted by [`minimize_switches`].
pub const SWITCH_ROUNDS: usize = 8;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("gadget {group} carries {flow} units at step {t}, capacity {capacity}")]
    GadgetOverflow {
        group: String,
        t: u32,
        flow: i64,
        capacity: u32,
    },
    #[error("flow vector has {found} entries, graph has {expected} arcs")]
    FlowLength { expected: usize, found: usize },
    #[error("travel time changed from {before} to {after} while reducing switches")]
    ObjectiveChanged { before: i128, after: i128 },
}

/// Right-of-way per gadget and step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSchedule {
    pub groups: Vec<GroupSchedule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSchedule {
    pub group_id: String,
    /// Per step: granted `(sending cell, receiving cell)` pairs as cell
    /// indices, one entry per vehicle; empty means no grant.
    pub grants: Vec<Vec<(u32, u32)>>,
}

impl SignalSchedule {
    /// `Σ_groups Σ_t 1[α^t ≠ α^{t-1}]`, with "no grant" a state of its own.
    pub fn switch_count(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.grants.windows(2).filter(|w| w[0] != w[1]).count())
            .sum()
    }

    pub fn group(&self, id: &str) -> Option<&GroupSchedule> {
        self.groups.iter().find(|g| g.group_id == id)
    }

    /// CSV rows `group_id,t,granted_movement`; movements are written as
    /// `from>to`, several joined by `;`, or `none`.
    pub fn to_csv(&self, g: &SuperGraph) -> String {
        let cells = &g.network().cells;
        let mut out = String::from("group_id,t,granted_movement\n");
        for grp in &self.groups {
            for (t, grant) in grp.grants.iter().enumerate() {
                let label = if grant.is_empty() {
                    "none".to_string()
                } else {
                    grant
                        .iter()
                        .map(|&(i, j)| format!("{}>{}", cells[i as usize].id, cells[j as usize].id))
                        .collect::<Vec<_>>()
                        .join(";")
                };
                out.push_str(&format!("{},{},{}\n", grp.group_id, t, label));
            }
        }
        out
    }
}

/// Travel-time optimum `x*` with its sink and conflict restrictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalSolution {
    pub flow: IntegralFlow,
    /// Travel-time objective `1ᵀx` over occupancy and residual arcs.
    pub objective: i128,
    /// `x_S*`, aligned with [`SuperGraph::sink_arcs`].
    pub sink_flows: Vec<i64>,
    /// `x_conf*`, aligned with [`SuperGraph::conflict_arcs`].
    pub conflict_flows: Vec<i64>,
    /// Vehicle-steps spent in cells during the horizon.
    pub total_travel_time: i64,
    /// Cumulative exits after each step.
    pub throughput_curve: Vec<i64>,
    pub schedule: SignalSchedule,
    /// Schedule read from the solver output before any switch reduction.
    pub raw_schedule: SignalSchedule,
}

impl OptimalSolution {
    pub fn throughput(&self) -> i64 {
        self.sink_flows.iter().sum()
    }
}

/// Unit cost per vehicle per step inside the network.
pub fn travel_time_costs(g: &SuperGraph) -> CostVector {
    CostVector::from_fn(g.arc_count(), |a| g.is_travel_arc(a) as i64)
}

fn solution_from_flow(
    g: &SuperGraph,
    flow: IntegralFlow,
    raw: Option<SignalSchedule>,
) -> Result<OptimalSolution, ControlError> {
    let x = &flow.flow;
    let objective = travel_time_costs(g).dot(x);
    let sink_flows: Vec<i64> = g.sink_arcs().iter().map(|&a| x[a]).collect();
    let conflict_flows: Vec<i64> = g.conflict_arcs().iter().map(|&a| x[a]).collect();
    let total_travel_time = (0..g.arc_count())
        .filter(|&a| g.key(a).class == ArcClass::Occupancy)
        .map(|a| x[a])
        .sum();
    let steps = g.horizon().steps as usize;
    let mut per_step = vec![0i64; steps];
    for &a in g.sink_arcs() {
        per_step[g.key(a).t as usize] += x[a];
    }
    let throughput_curve = per_step
        .iter()
        .scan(0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let schedule = infer_signal_schedule(x, g)?;
    let raw_schedule = raw.unwrap_or_else(|| schedule.clone());
    Ok(OptimalSolution {
        flow,
        objective,
        sink_flows,
        conflict_flows,
        total_travel_time,
        throughput_curve,
        schedule,
        raw_schedule,
    })
}

/// Minimizes total travel time in vehicle-steps.
pub fn optimal_control(g: &SuperGraph) -> Result<OptimalSolution, ControlError> {
    let flow = solve_min_cost(g, &travel_time_costs(g))?;
    solution_from_flow(g, flow, None)
}

/// Reads right-of-way off the gadget arcs of any feasible flow.
pub fn infer_signal_schedule(flow: &[i64], g: &SuperGraph) -> Result<SignalSchedule, ControlError> {
    if flow.len() != g.arc_count() {
        return Err(ControlError::FlowLength {
            expected: g.arc_count(),
            found: flow.len(),
        });
    }
    let net = g.network();
    let steps = g.horizon().steps as usize;
    // Per gadget and step: sending cells and receiving cells with multiplicity.
    let mut sends: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); steps]; net.gadgets.len()];
    let mut recvs: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); steps]; net.gadgets.len()];
    let mut through: Vec<Vec<i64>> = vec![vec![0; steps]; net.gadgets.len()];
    for (a, &x) in flow.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let key = g.key(a);
        if key.class != ArcClass::Connector {
            continue;
        }
        let c = &net.connectors[key.object as usize];
        let t = key.t as usize;
        match (c.role, c.from, c.to) {
            (ConnectorRole::GadgetInbound { gadget }, Endpoint::Cell(i), _) => {
                sends[gadget][t].extend(std::iter::repeat(i as u32).take(x as usize));
            }
            (ConnectorRole::GadgetOutbound { gadget }, _, Endpoint::Cell(j)) => {
                recvs[gadget][t].extend(std::iter::repeat(j as u32).take(x as usize));
            }
            (ConnectorRole::GadgetDirect { gadget }, Endpoint::Cell(i), Endpoint::Cell(j)) => {
                sends[gadget][t].extend(std::iter::repeat(i as u32).take(x as usize));
                recvs[gadget][t].extend(std::iter::repeat(j as u32).take(x as usize));
                through[gadget][t] += x;
            }
            (ConnectorRole::GadgetCore { gadget }, _, _) => through[gadget][t] += x,
            _ => {}
        }
    }
    let mut groups = Vec::with_capacity(net.gadgets.len());
    for (k, gadget) in net.gadgets.iter().enumerate() {
        let mut grants = Vec::with_capacity(steps);
        for t in 0..steps {
            if through[k][t] > gadget.capacity as i64 {
                return Err(ControlError::GadgetOverflow {
                    group: gadget.group_id.clone(),
                    t: t as u32,
                    flow: through[k][t],
                    capacity: gadget.capacity,
                });
            }
            let mut s = std::mem::take(&mut sends[k][t]);
            let mut r = std::mem::take(&mut recvs[k][t]);
            s.sort_unstable();
            r.sort_unstable();
            grants.push(s.into_iter().zip(r).collect());
        }
        groups.push(GroupSchedule {
            group_id: gadget.group_id.clone(),
            grants,
        });
    }
    Ok(SignalSchedule { groups })
}

/// Secondary costs rewarding gadget arcs that repeat a neighbouring step's
/// grant, and penalising a grant next to idle steps.
fn continuity_costs(g: &SuperGraph, schedule: &SignalSchedule) -> CostVector {
    let net = g.network();
    let steps = g.horizon().steps as usize;
    let mut c = CostVector::zeros(g.arc_count());
    for a in 0..g.arc_count() {
        let key = g.key(a);
        if key.class != ArcClass::Connector {
            continue;
        }
        let conn = &net.connectors[key.object as usize];
        let t = key.t as usize;
        let neighbours = [t.checked_sub(1), (t + 1 < steps).then_some(t + 1)];
        let grants = |gadget: usize| {
            let grants = &schedule.groups[gadget].grants;
            neighbours.into_iter().flatten().map(move |s| &grants[s])
        };
        let cost = match (conn.role, conn.from, conn.to) {
            (ConnectorRole::GadgetInbound { gadget }, Endpoint::Cell(i), _) => {
                -(grants(gadget)
                    .filter(|gr| gr.iter().any(|&(s, _)| s as usize == i))
                    .count() as i64)
            }
            (ConnectorRole::GadgetOutbound { gadget }, _, Endpoint::Cell(j)) => {
                -(grants(gadget)
                    .filter(|gr| gr.iter().any(|&(_, r)| r as usize == j))
                    .count() as i64)
            }
            (ConnectorRole::GadgetCore { gadget }, _, _) => {
                grants(gadget).filter(|gr| gr.is_empty()).count() as i64
            }
            _ => 0,
        };
        c.set(a, cost);
    }
    c
}

/// Looks among alternate travel-time optima for a schedule with fewer
/// switches.
///
/// Each round re-solves with travel time as the primary objective and a
/// continuity reward built from the current schedule as the secondary one,
/// keeping the result only if the switch count drops. This is a heuristic:
/// it never changes travel time but need not reach the fewest switches.
pub fn minimize_switches(
    sol: &OptimalSolution,
    g: &SuperGraph,
) -> Result<OptimalSolution, ControlError> {
    let primary = travel_time_costs(g);
    let mut best = sol.clone();
    let mut best_switches = best.schedule.switch_count();
    for _ in 0..SWITCH_ROUNDS {
        if best_switches == 0 {
            break;
        }
        let secondary = continuity_costs(g, &best.schedule);
        let bound = secondary.range_bound(g).max(1);
        let flow = solve_lexicographic(g, &primary, &secondary, bound)?;
        if flow.objectives[0] != sol.objective {
            return Err(ControlError::ObjectiveChanged {
                before: sol.objective,
                after: flow.objectives[0],
            });
        }
        let candidate = solution_from_flow(g, flow, Some(sol.raw_schedule.clone()))?;
        let switches = candidate.schedule.switch_count();
        if switches >= best_switches {
            break;
        }
        best = candidate;
        best_switches = switches;
    }
    if best.objective != sol.objective {
        return Err(ControlError::ObjectiveChanged {
            before: sol.objective,
            after: best.objective,
        });
    }
    best.raw_schedule = sol.raw_schedule.clone();
    Ok(best)
}

/// Optimal control followed by the switch-reduction pass.
pub fn baseline(g: &SuperGraph) -> Result<OptimalSolution, ControlError> {
    let raw = optimal_control(g)?;
    minimize_switches(&raw, g)
}

/// Per gadget id, the number of steps with any grant.
pub fn green_steps(schedule: &SignalSchedule) -> BTreeMap<&str, usize> {
    schedule
        .groups
        .iter()
        .map(|g| {
            (
                g.group_id.as_str(),
                g.grants.iter().filter(|x| !x.is_empty()).count(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures as nf;
    use crate::oracle::enumerate_flows;
    use crate::supergraph::fixtures::{burst, corridor, crossing, uniform};
    use crate::supergraph::{expand, Horizon, SinkCapacityPolicy};

    #[test]
    fn zero_demand_gives_zero_flow() {
        let g = corridor(2, 4, 0);
        let sol = optimal_control(&g).unwrap();
        assert!(sol.flow.flow.iter().all(|&x| x == 0));
        assert_eq!(sol.total_travel_time, 0);
        assert_eq!(sol.objective, 0);
    }

    #[test]
    fn corridor_vehicles_advance_every_step() {
        // src, c0, c1 and snk: five vehicles released one per step traverse
        // four cells each.
        let net = nf::corridor(2);
        let d = uniform(&net, 1, 5);
        let mut d2 = d.clone();
        d2.arrivals
            .values_mut()
            .for_each(|v| v.extend([0, 0, 0, 0]));
        let g = expand(
            &net,
            Horizon::new(9, 1.0),
            &d2,
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let sol = optimal_control(&g).unwrap();
        assert_eq!(sol.total_travel_time, 5 * 4);
        assert_eq!(sol.throughput(), 5);
        assert_eq!(sol.throughput_curve, vec![0, 0, 0, 1, 2, 3, 4, 5, 5]);
    }

    #[test]
    fn corridor_optimum_matches_enumeration() {
        let net = nf::corridor(2);
        let mut d = uniform(&net, 1, 6);
        d.arrivals.values_mut().for_each(|v| v[3..].fill(0));
        let g = expand(
            &net,
            Horizon::new(6, 1.0),
            &d,
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let sol = optimal_control(&g).unwrap();
        let (best, _) =
            crate::oracle::brute_force_min_cost(&g, &travel_time_costs(&g), 2_000_000).unwrap();
        assert_eq!(sol.objective, best);
        assert_eq!(sol.total_travel_time, 3 * 4);
    }

    #[test]
    fn crossing_serves_one_vehicle_per_step() {
        let g = crossing(6, 2);
        let sol = optimal_control(&g).unwrap();
        assert!(sol.conflict_flows.iter().all(|&x| x == 0 || x == 1));
        let s = &sol.schedule.groups[0];
        let served: usize = s.grants.iter().map(Vec::len).sum();
        assert_eq!(served, 4);
        assert!(s.grants[0..4].iter().all(|gr| gr.len() == 1));
        // The optimum dominates every feasible cumulative-exit curve.
        let mut curves = Vec::new();
        enumerate_flows(&g, 2_000_000, |x| {
            let mut acc = 0;
            let curve: Vec<i64> = (0..6u32)
                .map(|t| {
                    acc += g
                        .sink_arcs()
                        .iter()
                        .filter(|&&a| g.key(a).t == t)
                        .map(|&a| x[a])
                        .sum::<i64>();
                    acc
                })
                .collect();
            curves.push(curve);
        })
        .unwrap();
        for c in curves {
            assert!(c.iter().zip(&sol.throughput_curve).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn alternating_flow_reads_as_alternating_schedule() {
        let g = crossing(4, 2);
        let net = g.network();
        let w = net.cell_index("w").unwrap() as u32;
        let s = net.cell_index("s").unwrap() as u32;
        let e = net.cell_index("e").unwrap() as u32;
        let n = net.cell_index("n").unwrap() as u32;
        let mut flow = vec![0; g.arc_count()];
        for a in 0..g.arc_count() {
            let key = g.key(a);
            if key.class != ArcClass::Connector {
                continue;
            }
            let c = &net.connectors[key.object as usize];
            let west = key.t % 2 == 0;
            let on = match (c.role, c.from, c.to) {
                (ConnectorRole::GadgetCore { .. }, _, _) => true,
                (ConnectorRole::GadgetInbound { .. }, Endpoint::Cell(i), _) => {
                    (i as u32 == w) == west
                }
                (ConnectorRole::GadgetOutbound { .. }, _, Endpoint::Cell(j)) => {
                    (j as u32 == e) == west
                }
                _ => false,
            };
            flow[a] = on as i64;
        }
        let sched = infer_signal_schedule(&flow, &g).unwrap();
        assert_eq!(
            sched.groups[0].grants,
            vec![vec![(w, e)], vec![(s, n)], vec![(w, e)], vec![(s, n)]]
        );
        assert_eq!(sched.switch_count(), 3);
    }

    #[test]
    fn zero_flow_schedule_is_all_none() {
        let g = crossing(3, 1);
        let sched = infer_signal_schedule(&vec![0; g.arc_count()], &g).unwrap();
        assert!(sched.groups[0].grants.iter().all(Vec::is_empty));
        assert!(sched
            .to_csv(&g)
            .lines()
            .skip(1)
            .all(|l| l.ends_with(",none")));
    }

    #[test]
    fn overflowing_gadget_is_reported() {
        let g = crossing(2, 1);
        let mut flow = vec![0; g.arc_count()];
        flow[g.conflict_arcs()[0]] = 2;
        assert!(matches!(
            infer_signal_schedule(&flow, &g),
            Err(ControlError::GadgetOverflow { flow: 2, .. })
        ));
    }

    #[test]
    fn switch_pass_keeps_travel_time_and_never_adds_switches() {
        for (steps, d) in [(6, 2), (8, 1), (7, 3)] {
            let g = crossing(steps, d);
            let raw = optimal_control(&g).unwrap();
            let post = minimize_switches(&raw, &g).unwrap();
            assert_eq!(post.objective, raw.objective);
            assert!(post.schedule.switch_count() <= raw.schedule.switch_count());
            assert_eq!(post.raw_schedule, raw.schedule);
        }
    }

    #[test]
    fn switch_pass_compared_with_exhaustive_alternate_optima() {
        // One idle step: west has one vehicle, south two.
        let net = nf::crossing();
        let mut d = burst(&net, 1, 6);
        d.arrivals.get_mut("s").unwrap()[0] = 2;
        let g = expand(
            &net,
            Horizon::new(6, 1.0),
            &d,
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let raw = optimal_control(&g).unwrap();
        let post = minimize_switches(&raw, &g).unwrap();
        let c = travel_time_costs(&g);
        let mut fewest = usize::MAX;
        enumerate_flows(&g, 2_000_000, |x| {
            if c.dot(x) == raw.objective {
                fewest = fewest.min(infer_signal_schedule(x, &g).unwrap().switch_count());
            }
        })
        .unwrap();
        assert!(post.schedule.switch_count() <= raw.schedule.switch_count());
        assert!(post.schedule.switch_count() >= fewest);
    }

    #[test]
    fn unique_optimum_is_unchanged() {
        let g = corridor(2, 5, 1);
        let raw = optimal_control(&g).unwrap();
        let post = minimize_switches(&raw, &g).unwrap();
        assert_eq!(post, raw);
    }
}
