//! Time expansion of a road network into a static capacitated DAG.
//!
//! For every cell `i` and step `t < T` the graph holds an arrival node
//! `A(i,t)` and a departure node `P(i,t)`. The occupancy arc `A → P` carries
//! `x_i^t`; from `P(i,t)` vehicles either stay (slack arc to `A(i,t+1)`),
//! advance along a connector to the next layer, or leave through a sink arc.
//! Transshipment nodes get one copy per layer and connectors between them
//! stay inside that layer. The final layer `A(·,T)` drains into the
//! super-sink through residual arcs, so every demand vector is feasible.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    CellKind, ConnectorRole, Endpoint, NetworkError, ResolvedNetwork, RoadNetwork,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub steps: u32,
    /// Seconds per step.
    pub delta_tau: f64,
}

impl Horizon {
    pub fn new(steps: u32, delta_tau: f64) -> Self {
        Self { steps, delta_tau }
    }
}

/// Arrivals per source cell and step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub arrivals: BTreeMap<String, Vec<u32>>,
}

impl DemandProfile {
    pub fn total(&self) -> u64 {
        self.arrivals.values().flatten().map(|&d| d as u64).sum()
    }

    pub fn per_source(&self) -> BTreeMap<&str, u64> {
        self.arrivals
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|&d| d as u64).sum()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkCapacityPolicy {
    #[default]
    Uncapacitated,
    /// Sink arcs bounded by the sink cell's jam occupancy.
    Occupancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcClass {
    Source,
    Occupancy,
    Slack,
    Connector,
    Sink,
    Residual,
}

impl ArcClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ArcClass::Source => "source",
            ArcClass::Occupancy => "occupancy",
            ArcClass::Slack => "slack",
            ArcClass::Connector => "connector",
            ArcClass::Sink => "sink",
            ArcClass::Residual => "residual",
        }
    }
}

/// `object` is a cell index, or a connector index for connector arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcKey {
    pub class: ArcClass,
    pub object: u32,
    pub t: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Source,
    Sink,
    Arrival { cell: usize, t: u32 },
    Departure { cell: usize, t: u32 },
    Transfer { node: usize, t: u32 },
}

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("horizon must have at least one step")]
    EmptyHorizon,
    #[error("time step length must be positive")]
    NonPositiveStep,
    #[error("demand given for {0}, which is not a source cell")]
    DemandOnNonSource(String),
    #[error("demand given for unknown cell {0}")]
    UnknownDemandCell(String),
    #[error("demand series for {cell} has {found} entries, horizon has {expected}")]
    DemandLength {
        cell: String,
        expected: u32,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("graph has a directed cycle through node {node}")]
pub struct CycleError {
    pub node: usize,
}

/// Time-expanded network with arc bounds and the `R → S` demand.
#[derive(Debug, Clone)]
pub struct SuperGraph {
    network: ResolvedNetwork,
    horizon: Horizon,
    demand: DemandProfile,
    total_demand: i64,
    node_count: usize,
    tails: Vec<u32>,
    heads: Vec<u32>,
    caps: Vec<i64>,
    keys: Vec<ArcKey>,
    /// Position of each transshipment node within a layer.
    node_rank: Vec<usize>,
    layer_len: usize,
    conflict: Vec<usize>,
    sinks: Vec<usize>,
}

/// Expands `network` over `horizon` with the given demand.
pub fn expand(
    network: &RoadNetwork,
    horizon: Horizon,
    demand: &DemandProfile,
    sink_policy: SinkCapacityPolicy,
) -> Result<SuperGraph, ExpandError> {
    if horizon.steps == 0 {
        return Err(ExpandError::EmptyHorizon);
    }
    if horizon.delta_tau.is_nan() || horizon.delta_tau <= 0.0 {
        return Err(ExpandError::NonPositiveStep);
    }
    let resolved = network.resolve()?;
    let nc = resolved.cells.len();

    let mut arrivals: Vec<Option<&[u32]>> = vec![None; nc];
    for (id, series) in &demand.arrivals {
        let i = resolved
            .cell_index(id)
            .ok_or_else(|| ExpandError::UnknownDemandCell(id.clone()))?;
        if resolved.cells[i].kind != CellKind::Source {
            if series.iter().all(|&d| d == 0) {
                continue;
            }
            return Err(ExpandError::DemandOnNonSource(id.clone()));
        }
        if series.len() != horizon.steps as usize {
            return Err(ExpandError::DemandLength {
                cell: id.clone(),
                expected: horizon.steps,
                found: series.len(),
            });
        }
        arrivals[i] = Some(series);
    }
    let total = demand.total() as i64;

    let order = resolved.node_order();
    let mut node_rank = vec![0; resolved.nodes.len()];
    for (pos, &k) in order.iter().enumerate() {
        node_rank[k] = pos;
    }
    let layer_len = 2 * nc + resolved.nodes.len();
    let steps = horizon.steps;
    let node_count = 1 + steps as usize * layer_len + nc + 1;

    let mut g = SuperGraph {
        network: resolved,
        horizon,
        demand: demand.clone(),
        total_demand: total,
        node_count,
        tails: Vec::new(),
        heads: Vec::new(),
        caps: Vec::new(),
        keys: Vec::new(),
        node_rank,
        layer_len,
        conflict: Vec::new(),
        sinks: Vec::new(),
    };

    let n_sink_cells = g.network.sink_cells().count();
    let estimate = steps as usize * (2 * nc + g.network.connectors.len() + n_sink_cells) + nc;
    g.tails.reserve(estimate);
    g.heads.reserve(estimate);
    g.caps.reserve(estimate);
    g.keys.reserve(estimate);

    let bound = |g: &SuperGraph, i: usize| -> i64 {
        let c = &g.network.cells[i];
        if c.kind == CellKind::Source {
            total
        } else {
            c.max_occupancy as i64
        }
    };

    for t in 0..steps {
        for (i, series) in arrivals.iter().enumerate() {
            if let Some(series) = series {
                let d = series[t as usize] as i64;
                if d > 0 {
                    let a = g.arrival(i, t);
                    g.push(
                        0,
                        a,
                        d,
                        ArcKey {
                            class: ArcClass::Source,
                            object: i as u32,
                            t,
                        },
                    );
                }
            }
        }
        for i in 0..nc {
            let cap = bound(&g, i);
            let (a, p) = (g.arrival(i, t), g.departure(i, t));
            g.push(
                a,
                p,
                cap,
                ArcKey {
                    class: ArcClass::Occupancy,
                    object: i as u32,
                    t,
                },
            );
        }
        for i in 0..nc {
            let cap = bound(&g, i);
            let (p, a) = (g.departure(i, t), g.arrival(i, t + 1));
            g.push(
                p,
                a,
                cap,
                ArcKey {
                    class: ArcClass::Slack,
                    object: i as u32,
                    t,
                },
            );
        }
        for k in 0..g.network.connectors.len() {
            let c = &g.network.connectors[k];
            let tail = match c.from {
                Endpoint::Cell(i) => g.departure(i, t),
                Endpoint::Node(n) => g.transfer(n, t),
            };
            let head = match c.to {
                Endpoint::Cell(j) => g.arrival(j, t + 1),
                Endpoint::Node(n) => g.transfer(n, t),
            };
            let core = matches!(c.role, ConnectorRole::GadgetCore { .. });
            let cap = c.capacity as i64;
            let idx = g.push(
                tail,
                head,
                cap,
                ArcKey {
                    class: ArcClass::Connector,
                    object: k as u32,
                    t,
                },
            );
            if core {
                g.conflict.push(idx);
            }
        }
        for i in 0..nc {
            let cell = &g.network.cells[i];
            if cell.kind != CellKind::Sink {
                continue;
            }
            let cap = match sink_policy {
                SinkCapacityPolicy::Uncapacitated => total,
                SinkCapacityPolicy::Occupancy => cell.max_occupancy as i64,
            };
            let (p, s) = (g.departure(i, t), g.sink());
            let idx = g.push(
                p,
                s,
                cap,
                ArcKey {
                    class: ArcClass::Sink,
                    object: i as u32,
                    t,
                },
            );
            g.sinks.push(idx);
        }
    }
    for i in 0..nc {
        let cap = bound(&g, i);
        let (a, s) = (g.arrival(i, steps), g.sink());
        g.push(
            a,
            s,
            cap,
            ArcKey {
                class: ArcClass::Residual,
                object: i as u32,
                t: steps,
            },
        );
    }
    Ok(g)
}

impl SuperGraph {
    fn push(&mut self, tail: usize, head: usize, cap: i64, key: ArcKey) -> usize {
        self.tails.push(tail as u32);
        self.heads.push(head as u32);
        self.caps.push(cap);
        self.keys.push(key);
        self.tails.len() - 1
    }

    #[cfg(test)]
    pub(crate) fn push_arc_for_test(
        &mut self,
        tail: usize,
        head: usize,
        cap: i64,
        key: ArcKey,
    ) -> usize {
        self.push(tail, head, cap, key)
    }

    #[cfg(test)]
    pub(crate) fn set_head_for_test(&mut self, arc: usize, head: u32) {
        self.heads[arc] = head;
    }

    pub fn network(&self) -> &ResolvedNetwork {
        &self.network
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn demand(&self) -> &DemandProfile {
        &self.demand
    }

    /// Total demand `D`.
    pub fn total_demand(&self) -> i64 {
        self.total_demand
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.tails.len()
    }

    pub fn tail(&self, a: usize) -> usize {
        self.tails[a] as usize
    }

    pub fn head(&self, a: usize) -> usize {
        self.heads[a] as usize
    }

    pub fn capacity(&self, a: usize) -> i64 {
        self.caps[a]
    }

    pub fn key(&self, a: usize) -> ArcKey {
        self.keys[a]
    }

    pub fn tails(&self) -> &[u32] {
        &self.tails
    }

    pub fn heads(&self) -> &[u32] {
        &self.heads
    }

    pub fn capacities(&self) -> &[i64] {
        &self.caps
    }

    pub fn keys(&self) -> &[ArcKey] {
        &self.keys
    }

    /// Node balance `b`: `D` at the super-source, `-D` at the super-sink.
    pub fn supply(&self, v: usize) -> i64 {
        if v == self.source() {
            self.total_demand
        } else if v == self.sink() {
            -self.total_demand
        } else {
            0
        }
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.node_count - 1
    }

    fn layer_base(&self, t: u32) -> usize {
        1 + t as usize * self.layer_len
    }

    pub fn arrival(&self, cell: usize, t: u32) -> usize {
        self.layer_base(t) + cell
    }

    /// Departure copy `P(cell, t)`; only defined for `t < T`.
    pub fn departure(&self, cell: usize, t: u32) -> usize {
        debug_assert!(t < self.horizon.steps);
        self.layer_base(t) + self.network.cells.len() + cell
    }

    pub fn transfer(&self, node: usize, t: u32) -> usize {
        debug_assert!(t < self.horizon.steps);
        self.layer_base(t) + 2 * self.network.cells.len() + self.node_rank[node]
    }

    pub fn node_ref(&self, v: usize) -> NodeRef {
        if v == self.source() {
            return NodeRef::Source;
        }
        if v == self.sink() {
            return NodeRef::Sink;
        }
        let nc = self.network.cells.len();
        let off = v - 1;
        let t = (off / self.layer_len) as u32;
        let r = off % self.layer_len;
        if t == self.horizon.steps || r < nc {
            NodeRef::Arrival { cell: r, t }
        } else if r < 2 * nc {
            NodeRef::Departure { cell: r - nc, t }
        } else {
            let rank = r - 2 * nc;
            let node = self
                .node_rank
                .iter()
                .position(|&x| x == rank)
                .expect("rank in range");
            NodeRef::Transfer { node, t }
        }
    }

    /// Stable text label: `R`, `S`, `A:cell@t`, `P:cell@t`, `N:node@t`.
    pub fn node_label(&self, v: usize) -> String {
        match self.node_ref(v) {
            NodeRef::Source => "R".into(),
            NodeRef::Sink => "S".into(),
            NodeRef::Arrival { cell, t } => format!("A:{}@{}", self.network.cells[cell].id, t),
            NodeRef::Departure { cell, t } => format!("P:{}@{}", self.network.cells[cell].id, t),
            NodeRef::Transfer { node, t } => format!("N:{}@{}", self.network.nodes[node].id, t),
        }
    }

    /// Identifier of the cell or connector an arc belongs to.
    pub fn object_id(&self, a: usize) -> &str {
        let key = self.keys[a];
        match key.class {
            ArcClass::Connector => &self.network.connectors[key.object as usize].id,
            _ => &self.network.cells[key.object as usize].id,
        }
    }

    /// The `(u, v)` gadget copies `A_conf`, ordered by step then gadget.
    pub fn conflict_arcs(&self) -> &[usize] {
        &self.conflict
    }

    pub fn conflict_keys(&self) -> Vec<ArcKey> {
        self.conflict.iter().map(|&a| self.keys[a]).collect()
    }

    /// Sink-class arcs, the throughput measured by the impact objective.
    pub fn sink_arcs(&self) -> &[usize] {
        &self.sinks
    }

    /// Arcs charged one unit in the travel-time objective. Each unit on an
    /// occupancy arc is one vehicle in one cell for one step; a residual arc
    /// carries the vehicles still inside at the end of the horizon.
    pub fn is_travel_arc(&self, a: usize) -> bool {
        matches!(self.keys[a].class, ArcClass::Occupancy | ArcClass::Residual)
    }

    /// Closed-form arc count `T·(2|C| + |L|) + source + sink + residual`,
    /// with `|L|` counting emitted gadget connectors.
    pub fn expected_arc_count(&self) -> usize {
        let nc = self.network.cells.len();
        let sources: usize = self
            .demand
            .arrivals
            .iter()
            .filter(|(id, _)| {
                self.network
                    .cell_index(id)
                    .is_some_and(|i| self.network.cells[i].kind == CellKind::Source)
            })
            .map(|(_, s)| s.iter().filter(|&&d| d > 0).count())
            .sum();
        let sink_cells = self.network.sink_cells().count();
        let steps = self.horizon.steps as usize;
        steps * (2 * nc + self.network.connectors.len()) + sources + steps * sink_cells + nc
    }

    /// Looks an arc up by key.
    pub fn find_arc(&self, key: ArcKey) -> Option<usize> {
        self.keys.iter().position(|&k| k == key)
    }

    /// Exports the edge list `tail head capacity class object_id t`.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for a in 0..self.arc_count() {
            self.write_edge(&mut out, a);
            out.push('\n');
        }
        out
    }

    pub(crate) fn write_edge(&self, out: &mut String, a: usize) {
        use std::fmt::Write;
        let key = self.keys[a];
        let _ = write!(
            out,
            "{} {} {} {} {} {}",
            self.node_label(self.tail(a)),
            self.node_label(self.head(a)),
            self.caps[a],
            key.class.as_str(),
            self.object_id(a),
            key.t
        );
    }
}

/// True iff every arc has one valid tail and one distinct valid head and the
/// balance vector sums to zero with `b_R = D`, `b_S = -D`.
pub fn incidence_check(g: &SuperGraph) -> bool {
    let n = g.node_count();
    let arcs_ok = (0..g.arc_count()).all(|a| {
        let (t, h) = (g.tail(a), g.head(a));
        t < n && h < n && t != h
    });
    let balance: i64 = (0..n).map(|v| g.supply(v)).sum();
    arcs_ok && balance == 0 && g.supply(g.source()) == g.total_demand() && g.source() != g.sink()
}

/// Topological order of the nodes, smallest index first among ready nodes.
pub fn to_dag_order(g: &SuperGraph) -> Result<Vec<usize>, CycleError> {
    let n = g.node_count();
    let mut indeg = vec![0u32; n];
    let mut first = vec![0usize; n + 1];
    for a in 0..g.arc_count() {
        indeg[g.head(a)] += 1;
        first[g.tail(a) + 1] += 1;
    }
    for v in 0..n {
        first[v + 1] += first[v];
    }
    let mut fill = first.clone();
    let mut out = vec![0u32; g.arc_count()];
    for a in 0..g.arc_count() {
        let t = g.tail(a);
        out[fill[t]] = g.head(a) as u32;
        fill[t] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &out[first[v]..first[v + 1]] {
            let w = w as usize;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() < n {
        let node = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(CycleError { node });
    }
    Ok(order)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::network::fixtures as nf;

    #[test]
    fn three_cell_chain_layers() {
        // i -> j -> k with i a source and k a sink, four steps.
        let net = nf::corridor(1);
        let g = expand(
            &net,
            Horizon::new(4, 1.0),
            &burst(&net, 2, 4),
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        assert_eq!(g.node_count(), 1 + 4 * 6 + 3 + 1);
        // Per layer: 3 occupancy, 3 slack, 2 connectors, 1 sink; one source
        // arc at t = 0; three residual arcs.
        assert_eq!(g.arc_count(), 4 * (3 + 3 + 2 + 1) + 1 + 3);
        assert_eq!(g.arc_count(), g.expected_arc_count());
        let slack = g
            .find_arc(ArcKey {
                class: ArcClass::Slack,
                object: 1,
                t: 2,
            })
            .unwrap();
        assert_eq!(g.node_label(g.tail(slack)), "P:c0@2");
        assert_eq!(g.node_label(g.head(slack)), "A:c0@3");
        assert_eq!(g.capacity(slack), 5);
        let conn = g
            .find_arc(ArcKey {
                class: ArcClass::Connector,
                object: 0,
                t: 0,
            })
            .unwrap();
        assert_eq!(g.node_label(g.tail(conn)), "P:src@0");
        assert_eq!(g.node_label(g.head(conn)), "A:c0@1");
    }

    #[test]
    fn two_intersection_arc_count_matches_formula() {
        let net = nf::two_intersections();
        let g = expand(
            &net,
            Horizon::new(4, 1.0),
            &uniform(&net, 1, 4),
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        let nc = net.cells.len();
        // Plain connectors plus, per gadget, two inbound, one core, two outbound.
        let links = net.connectors.len() + 2 * 5;
        let sources = 3 * 4;
        let sinks = 4 * 4;
        assert_eq!(g.arc_count(), 4 * (2 * nc + links) + sources + sinks + nc);
        assert_eq!(g.arc_count(), g.expected_arc_count());
        assert!(incidence_check(&g));
        let order = to_dag_order(&g).unwrap();
        let layer_of = |v: usize| match g.node_ref(v) {
            NodeRef::Source => -1,
            NodeRef::Sink => i64::MAX,
            NodeRef::Arrival { t, .. }
            | NodeRef::Departure { t, .. }
            | NodeRef::Transfer { t, .. } => t as i64,
        };
        assert!(order.windows(2).all(|w| layer_of(w[0]) <= layer_of(w[1])));
    }

    #[test]
    fn zero_demand_graph_has_no_source_arcs() {
        let net = nf::crossing();
        let g = expand(
            &net,
            Horizon::new(3, 1.0),
            &DemandProfile::default(),
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        assert_eq!(g.total_demand(), 0);
        assert!(g.keys().iter().all(|k| k.class != ArcClass::Source));
        assert!(incidence_check(&g));
    }

    #[test]
    fn conflict_arc_count_is_gadgets_times_steps() {
        let g = crossing(450, 1);
        assert_eq!(g.conflict_arcs().len(), 450);
        assert!(g.conflict_arcs().iter().all(|&a| g.capacity(a) == 1));
        let g = corridor(3, 5, 1);
        assert!(g.conflict_arcs().is_empty());
    }

    #[test]
    fn deleted_head_fails_incidence() {
        let mut g = crossing(2, 1);
        assert!(incidence_check(&g));
        g.set_head_for_test(3, u32::MAX);
        assert!(!incidence_check(&g));
    }

    #[test]
    fn reversed_slack_creates_cycle() {
        let mut g = corridor(1, 3, 1);
        let s = g
            .find_arc(ArcKey {
                class: ArcClass::Slack,
                object: 1,
                t: 0,
            })
            .unwrap();
        let (t, h) = (g.tail(s), g.head(s));
        g.push_arc_for_test(
            h,
            t,
            1,
            ArcKey {
                class: ArcClass::Slack,
                object: 1,
                t: 0,
            },
        );
        assert!(to_dag_order(&g).is_err());
    }

    #[test]
    fn dag_order_starts_at_source_and_ends_at_sink() {
        let g = crossing(4, 2);
        let order = to_dag_order(&g).unwrap();
        assert_eq!(order[0], g.source());
        assert_eq!(*order.last().unwrap(), g.sink());
        let mut pos = vec![0; g.node_count()];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        assert!((0..g.arc_count()).all(|a| pos[g.tail(a)] < pos[g.head(a)]));
    }

    #[test]
    fn expansion_is_deterministic() {
        let a = crossing(5, 2);
        let b = crossing(5, 2);
        assert_eq!(a.edge_list(), b.edge_list());
    }

    #[test]
    fn demand_errors() {
        let net = nf::corridor(1);
        let bad = DemandProfile {
            arrivals: [("c0".to_string(), vec![1, 0])].into_iter().collect(),
        };
        assert!(matches!(
            expand(
                &net,
                Horizon::new(2, 1.0),
                &bad,
                SinkCapacityPolicy::Uncapacitated
            ),
            Err(ExpandError::DemandOnNonSource(_))
        ));
        assert!(matches!(
            expand(
                &net,
                Horizon::new(0, 1.0),
                &DemandProfile::default(),
                SinkCapacityPolicy::Uncapacitated
            ),
            Err(ExpandError::EmptyHorizon)
        ));
    }

    #[test]
    fn sink_policy_sets_sink_bounds() {
        let net = nf::corridor(1);
        let d = uniform(&net, 1, 3);
        let g = expand(
            &net,
            Horizon::new(3, 1.0),
            &d,
            SinkCapacityPolicy::Occupancy,
        )
        .unwrap();
        assert!(g.sink_arcs().iter().all(|&a| g.capacity(a) == 5));
        let g = expand(
            &net,
            Horizon::new(3, 1.0),
            &d,
            SinkCapacityPolicy::Uncapacitated,
        )
        .unwrap();
        assert!(g.sink_arcs().iter().all(|&a| g.capacity(a) == 3));
    }

    #[test]
    fn gadget_path_stays_in_layer() {
        let g = crossing(2, 1);
        for &a in g.conflict_arcs() {
            let (NodeRef::Transfer { t: t1, .. }, NodeRef::Transfer { t: t2, .. }) =
                (g.node_ref(g.tail(a)), g.node_ref(g.head(a)))
            else {
                panic!("core arc must join transfer nodes");
            };
            assert_eq!(t1, t2);
        }
    }
}
