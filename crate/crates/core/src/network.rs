//! Physical road network: cells, connectors, transshipment nodes and
//! intersection conflict groups.
//!
//! A [`RoadNetwork`] is the serializable description. [`RoadNetwork::resolve`]
//! validates it and expands every conflict group into its `(u, v)` gadget,
//! producing the flat [`ResolvedNetwork`] that the time expansion consumes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Ordinary,
    Source,
    Sink,
}

fn one() -> u32 {
    1
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

/// A fixed-length road segment traversed in one time step at free-flow speed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub kind: CellKind,
    /// Jam occupancy `N` in vehicles.
    pub max_occupancy: u32,
    /// Flow capacity `Q` in vehicles per time step.
    pub flow_capacity: u32,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub lanes: u32,
}

impl Cell {
    pub fn new(
        id: impl Into<String>,
        kind: CellKind,
        max_occupancy: u32,
        flow_capacity: u32,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            max_occupancy,
            flow_capacity,
            lanes: 1,
        }
    }

    pub fn with_lanes(mut self, lanes: u32) -> Self {
        self.lanes = lanes;
        self
    }
}

/// A directed flow channel between two cells, or between a cell and a
/// diverge/merge node.
///
/// When `capacity` is omitted it is derived from the endpoints: the minimum
/// of both cell capacities for cell-to-cell connectors, or the capacity of
/// the single cell endpoint otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connector {
    pub id: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
}

impl Connector {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            capacity: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Diverge,
    Merge,
    /// Gadget node `u`; collects the conflicting movements.
    ConflictUpper,
    /// Gadget node `v`; fans out to the receiving cells.
    ConflictLower,
}

/// Zero-storage transfer point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransshipmentNode {
    pub id: String,
    pub kind: NodeKind,
}

impl TransshipmentNode {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Self {
            id: id.into(),
            kind,
        }
    }
}

/// One intersection movement from a sending cell to a receiving cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Movement {
    pub from: String,
    pub to: String,
}

impl Movement {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
        }
    }
}

/// Pairwise-conflicting movements routed through one `(u, v)` gadget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictGroup {
    pub id: String,
    pub movements: Vec<Movement>,
    /// Units allowed through the gadget per step. Defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gadget_capacity: Option<u32>,
}

impl ConflictGroup {
    pub fn new(id: impl Into<String>, movements: Vec<Movement>) -> Self {
        Self {
            id: id.into(),
            movements,
            gadget_capacity: None,
        }
    }

    pub fn capacity(&self) -> u32 {
        self.gadget_capacity.unwrap_or(1)
    }
}

/// Descriptive metadata for a physical link discretized into cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: String,
    pub length_m: f64,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub cells: Vec<Cell>,
    #[serde(default)]
    pub connectors: Vec<Connector>,
    #[serde(default)]
    pub nodes: Vec<TransshipmentNode>,
    #[serde(default)]
    pub conflict_groups: Vec<ConflictGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<Link>,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("conflict group {group}: movement {from}->{to} listed twice")]
    DuplicateMovement {
        group: String,
        from: String,
        to: String,
    },
    #[error("conflict group {0} has fewer than two movements and no explicit gadget capacity")]
    UnderspecifiedGroup(String),
    #[error("conflict group {0} has zero gadget capacity")]
    ZeroGadgetCapacity(String),
    #[error("conflict group {group} references unknown cell {cell}")]
    UnknownCell { group: String, cell: String },
    #[error("network failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("malformed network description: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A structural invariant violated by a network description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("network has no source cell")]
    NoSource,
    #[error("network has no sink cell")]
    NoSink,
    #[error("identifier {0:?} is empty or contains whitespace")]
    InvalidId(String),
    #[error("identifier {0} is used more than once")]
    DuplicateId(String),
    #[error("cell {cell}: {detail}")]
    CellParameters { cell: String, detail: String },
    #[error("connector {connector} references unknown endpoint {endpoint}")]
    DanglingConnector { connector: String, endpoint: String },
    #[error("connector {0} starts and ends at the same object")]
    SelfLoop(String),
    #[error("more than one connector from {from} to {to}")]
    DuplicateConnector { from: String, to: String },
    #[error("connector {connector}: capacity {found} but endpoints imply {expected}")]
    ConnectorCapacity {
        connector: String,
        expected: u32,
        found: u32,
    },
    #[error("connector {0} joins two transshipment nodes without an explicit capacity")]
    MissingCapacity(String),
    #[error("diverge node {node} has {inbound} inbound and {outbound} outbound connectors")]
    DivergeDegree {
        node: String,
        inbound: usize,
        outbound: usize,
    },
    #[error("merge node {node} has {inbound} inbound and {outbound} outbound connectors")]
    MergeDegree {
        node: String,
        inbound: usize,
        outbound: usize,
    },
    #[error("node {0} is a gadget node; gadgets are emitted from conflict_groups")]
    DeclaredGadgetNode(String),
    #[error("conflict group {group}: {detail}")]
    Gadget { group: String, detail: String },
    #[error("movement {from}->{to} belongs to more than one conflict group")]
    SharedMovement { from: String, to: String },
    #[error("{kind:?} cell {cell} has {count} outlets")]
    Outlets {
        cell: String,
        kind: CellKind,
        count: usize,
    },
    #[error("{kind:?} cell {cell} has {count} inlets")]
    Inlets {
        cell: String,
        kind: CellKind,
        count: usize,
    },
    #[error("transshipment nodes around {0} form a cycle")]
    TransshipmentCycle(String),
    #[error("no sink is reachable from source {0}")]
    UnreachableSink(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "pass");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Cell(usize),
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectorRole {
    Plain,
    /// Unit lane connector `(i, u)` into gadget `group`.
    GadgetInbound {
        gadget: usize,
    },
    /// The `(u, v)` connector of a gadget; its time copies form `A_conf`.
    GadgetCore {
        gadget: usize,
    },
    GadgetOutbound {
        gadget: usize,
    },
    /// Single-movement group collapsed into a plain connector.
    GadgetDirect {
        gadget: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedConnector {
    pub id: String,
    pub from: Endpoint,
    pub to: Endpoint,
    pub capacity: u32,
    pub role: ConnectorRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub group_id: String,
    pub capacity: u32,
    /// `None` for a degenerate single-movement group.
    pub core: Option<usize>,
    pub inbound: Vec<usize>,
    pub outbound: Vec<usize>,
}

/// Flat network after gadget emission: the input to time expansion.
#[derive(Debug, Clone)]
pub struct ResolvedNetwork {
    pub cells: Vec<Cell>,
    pub nodes: Vec<TransshipmentNode>,
    pub connectors: Vec<ResolvedConnector>,
    pub gadgets: Vec<Gadget>,
    cell_index: HashMap<String, usize>,
}

impl ResolvedNetwork {
    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.cell_index.get(id).copied()
    }

    pub fn sink_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == CellKind::Sink)
            .map(|(i, _)| i)
    }

    pub fn source_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == CellKind::Source)
            .map(|(i, _)| i)
    }

    pub fn endpoint_id(&self, e: Endpoint) -> &str {
        match e {
            Endpoint::Cell(i) => &self.cells[i].id,
            Endpoint::Node(i) => &self.nodes[i].id,
        }
    }

    /// Transshipment nodes ordered so every node-to-node connector points forward.
    pub fn node_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for c in &self.connectors {
            if let (Endpoint::Node(a), Endpoint::Node(b)) = (c.from, c.to) {
                out[a].push(b);
                indeg[b] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        order
    }
}

/// Connectors and nodes emitted for one conflict group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetEmission {
    pub upper: Option<TransshipmentNode>,
    pub lower: Option<TransshipmentNode>,
    pub connectors: Vec<EmittedConnector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetArc {
    Inbound,
    Core,
    Outbound,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedConnector {
    pub id: String,
    pub from: String,
    pub to: String,
    pub capacity: u32,
    pub arc: GadgetArc,
}

impl GadgetEmission {
    pub fn core(&self) -> Option<&EmittedConnector> {
        self.connectors.iter().find(|c| c.arc == GadgetArc::Core)
    }

    pub fn of_kind(&self, arc: GadgetArc) -> impl Iterator<Item = &EmittedConnector> {
        self.connectors.iter().filter(move |c| c.arc == arc)
    }
}

/// Expands a conflict group into its `(u, v)` gadget.
///
/// Each sending cell contributes one unit-capacity `(i, u)` connector per
/// lane, each distinct receiving cell one `(v, j)` connector, and a single
/// `(u, v)` connector carries the gadget capacity. A group with a single
/// movement collapses into one plain connector.
pub fn build_conflict_gadget(
    group: &ConflictGroup,
    network: &RoadNetwork,
) -> Result<GadgetEmission, NetworkError> {
    let cells: HashMap<&str, &Cell> = network.cells.iter().map(|c| (c.id.as_str(), c)).collect();
    let lookup = |id: &str| -> Result<&Cell, NetworkError> {
        cells
            .get(id)
            .copied()
            .ok_or_else(|| NetworkError::UnknownCell {
                group: group.id.clone(),
                cell: id.to_string(),
            })
    };

    let mut seen = BTreeSet::new();
    for m in &group.movements {
        lookup(&m.from)?;
        lookup(&m.to)?;
        if !seen.insert((m.from.as_str(), m.to.as_str())) {
            return Err(NetworkError::DuplicateMovement {
                group: group.id.clone(),
                from: m.from.clone(),
                to: m.to.clone(),
            });
        }
    }
    if group.movements.len() < 2 && group.gadget_capacity.is_none() {
        return Err(NetworkError::UnderspecifiedGroup(group.id.clone()));
    }
    let capacity = group.capacity();
    if capacity == 0 {
        return Err(NetworkError::ZeroGadgetCapacity(group.id.clone()));
    }

    if group.movements.len() == 1 {
        let m = &group.movements[0];
        let from = lookup(&m.from)?;
        let to = lookup(&m.to)?;
        return Ok(GadgetEmission {
            upper: None,
            lower: None,
            connectors: vec![EmittedConnector {
                id: format!("{}:{}>{}", group.id, m.from, m.to),
                from: m.from.clone(),
                to: m.to.clone(),
                capacity: capacity.min(from.flow_capacity).min(to.flow_capacity),
                arc: GadgetArc::Direct,
            }],
        });
    }

    let u = format!("{}.u", group.id);
    let v = format!("{}.v", group.id);
    let mut senders: Vec<&str> = Vec::new();
    let mut receivers: Vec<&str> = Vec::new();
    for m in &group.movements {
        if !senders.contains(&m.from.as_str()) {
            senders.push(&m.from);
        }
        if !receivers.contains(&m.to.as_str()) {
            receivers.push(&m.to);
        }
    }

    let mut connectors = Vec::new();
    for s in &senders {
        let cell = lookup(s)?;
        for lane in 0..cell.lanes {
            connectors.push(EmittedConnector {
                id: format!("{}:{}>u#{}", group.id, s, lane),
                from: s.to_string(),
                to: u.clone(),
                capacity: 1,
                arc: GadgetArc::Inbound,
            });
        }
    }
    connectors.push(EmittedConnector {
        id: format!("{}:u>v", group.id),
        from: u.clone(),
        to: v.clone(),
        capacity,
        arc: GadgetArc::Core,
    });
    for r in &receivers {
        let cell = lookup(r)?;
        connectors.push(EmittedConnector {
            id: format!("{}:v>{}", group.id, r),
            from: v.clone(),
            to: r.to_string(),
            capacity: capacity.min(cell.flow_capacity),
            arc: GadgetArc::Outbound,
        });
    }

    Ok(GadgetEmission {
        upper: Some(TransshipmentNode::new(u, NodeKind::ConflictUpper)),
        lower: Some(TransshipmentNode::new(v, NodeKind::ConflictLower)),
        connectors,
    })
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(char::is_whitespace)
}

impl RoadNetwork {
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.id == id)
    }

    /// Upstream (Γ⁻) and downstream (Γ⁺) objects of every cell and node,
    /// gadgets included.
    pub fn adjacency(&self) -> (BTreeMap<String, Vec<String>>, BTreeMap<String, Vec<String>>) {
        let mut up: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut down: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut add = |from: &str, to: &str| {
            let d = down.entry(from.to_string()).or_default();
            if !d.iter().any(|x| x == to) {
                d.push(to.to_string());
            }
            let u = up.entry(to.to_string()).or_default();
            if !u.iter().any(|x| x == from) {
                u.push(from.to_string());
            }
        };
        for c in &self.connectors {
            add(&c.from, &c.to);
        }
        for g in &self.conflict_groups {
            if let Ok(em) = build_conflict_gadget(g, self) {
                for c in &em.connectors {
                    add(&c.from, &c.to);
                }
            }
        }
        (up, down)
    }

    /// Validates and flattens the network, emitting every conflict gadget.
    pub fn resolve(&self) -> Result<ResolvedNetwork, NetworkError> {
        let report = validate(self);
        if !report.is_pass() {
            return Err(NetworkError::Invalid(report));
        }
        let cell_index: HashMap<String, usize> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();
        let mut nodes = self.nodes.clone();
        let mut node_index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let endpoint = |id: &str, node_index: &HashMap<String, usize>| -> Endpoint {
            match cell_index.get(id) {
                Some(&i) => Endpoint::Cell(i),
                None => Endpoint::Node(node_index[id]),
            }
        };

        let mut connectors = Vec::new();
        for c in &self.connectors {
            let from = endpoint(&c.from, &node_index);
            let to = endpoint(&c.to, &node_index);
            connectors.push(ResolvedConnector {
                id: c.id.clone(),
                from,
                to,
                capacity: self.connector_capacity(c).unwrap_or(0),
                role: ConnectorRole::Plain,
            });
        }

        let mut gadgets = Vec::new();
        for group in &self.conflict_groups {
            let em = build_conflict_gadget(group, self)?;
            let gi = gadgets.len();
            for n in [&em.upper, &em.lower].into_iter().flatten() {
                node_index.insert(n.id.clone(), nodes.len());
                nodes.push(n.clone());
            }
            let mut gadget = Gadget {
                group_id: group.id.clone(),
                capacity: group.capacity(),
                core: None,
                inbound: Vec::new(),
                outbound: Vec::new(),
            };
            for c in &em.connectors {
                let idx = connectors.len();
                let role = match c.arc {
                    GadgetArc::Inbound => {
                        gadget.inbound.push(idx);
                        ConnectorRole::GadgetInbound { gadget: gi }
                    }
                    GadgetArc::Core => {
                        gadget.core = Some(idx);
                        ConnectorRole::GadgetCore { gadget: gi }
                    }
                    GadgetArc::Outbound => {
                        gadget.outbound.push(idx);
                        ConnectorRole::GadgetOutbound { gadget: gi }
                    }
                    GadgetArc::Direct => ConnectorRole::GadgetDirect { gadget: gi },
                };
                connectors.push(ResolvedConnector {
                    id: c.id.clone(),
                    from: endpoint(&c.from, &node_index),
                    to: endpoint(&c.to, &node_index),
                    capacity: c.capacity,
                    role,
                });
            }
            gadgets.push(gadget);
        }

        Ok(ResolvedNetwork {
            cells: self.cells.clone(),
            nodes,
            connectors,
            gadgets,
            cell_index,
        })
    }

    /// Capacity implied by the endpoints, or `None` for an unspecified
    /// node-to-node connector.
    fn implied_capacity(&self, c: &Connector) -> Option<u32> {
        match (self.cell(&c.from), self.cell(&c.to)) {
            (Some(a), Some(b)) => Some(a.flow_capacity.min(b.flow_capacity)),
            (Some(a), None) => Some(a.flow_capacity),
            (None, Some(b)) => Some(b.flow_capacity),
            (None, None) => None,
        }
    }

    fn connector_capacity(&self, c: &Connector) -> Option<u32> {
        c.capacity.or_else(|| self.implied_capacity(c))
    }
}

/// Checks every structural invariant and reports all violations found.
pub fn validate(network: &RoadNetwork) -> ValidationReport {
    let mut violations = Vec::new();

    if !network.cells.iter().any(|c| c.kind == CellKind::Source) {
        violations.push(Violation::NoSource);
    }
    if !network.cells.iter().any(|c| c.kind == CellKind::Sink) {
        violations.push(Violation::NoSink);
    }

    let mut ids = BTreeSet::new();
    let all_ids = network
        .cells
        .iter()
        .map(|c| c.id.as_str())
        .chain(network.nodes.iter().map(|n| n.id.as_str()))
        .chain(network.conflict_groups.iter().map(|g| g.id.as_str()));
    for id in all_ids {
        if !valid_id(id) {
            violations.push(Violation::InvalidId(id.to_string()));
        }
        if !ids.insert(id) {
            violations.push(Violation::DuplicateId(id.to_string()));
        }
    }
    let mut connector_ids = BTreeSet::new();
    for c in &network.connectors {
        if !valid_id(&c.id) {
            violations.push(Violation::InvalidId(c.id.clone()));
        }
        if !connector_ids.insert(c.id.as_str()) {
            violations.push(Violation::DuplicateId(c.id.clone()));
        }
    }

    for c in &network.cells {
        let detail = if c.max_occupancy == 0 || c.flow_capacity == 0 || c.lanes == 0 {
            Some("occupancy, capacity and lanes must be at least 1".to_string())
        } else if c.max_occupancy < c.flow_capacity {
            Some(format!(
                "max occupancy {} is below flow capacity {}",
                c.max_occupancy, c.flow_capacity
            ))
        } else {
            None
        };
        if let Some(detail) = detail {
            violations.push(Violation::CellParameters {
                cell: c.id.clone(),
                detail,
            });
        }
    }

    let cells: HashMap<&str, &Cell> = network.cells.iter().map(|c| (c.id.as_str(), c)).collect();
    let nodes: HashMap<&str, &TransshipmentNode> =
        network.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    for n in &network.nodes {
        if matches!(n.kind, NodeKind::ConflictUpper | NodeKind::ConflictLower) {
            violations.push(Violation::DeclaredGadgetNode(n.id.clone()));
        }
    }

    // Outlet/inlet tallies per cell and per node; a gadget counts once.
    let mut outlets: HashMap<&str, usize> = HashMap::new();
    let mut inlets: HashMap<&str, usize> = HashMap::new();
    let mut pairs = BTreeSet::new();
    let mut node_edges: Vec<(&str, &str)> = Vec::new();
    let mut well_formed = true;
    for c in &network.connectors {
        let mut ok = true;
        for end in [&c.from, &c.to] {
            if !cells.contains_key(end.as_str()) && !nodes.contains_key(end.as_str()) {
                violations.push(Violation::DanglingConnector {
                    connector: c.id.clone(),
                    endpoint: end.clone(),
                });
                ok = false;
            }
        }
        if c.from == c.to {
            violations.push(Violation::SelfLoop(c.id.clone()));
            ok = false;
        }
        if !ok {
            well_formed = false;
            continue;
        }
        if !pairs.insert((c.from.as_str(), c.to.as_str())) {
            violations.push(Violation::DuplicateConnector {
                from: c.from.clone(),
                to: c.to.clone(),
            });
        }
        match (network.implied_capacity(c), c.capacity) {
            (Some(expected), Some(found))
                if cells.contains_key(c.from.as_str())
                    && cells.contains_key(c.to.as_str())
                    && expected != found =>
            {
                violations.push(Violation::ConnectorCapacity {
                    connector: c.id.clone(),
                    expected,
                    found,
                });
            }
            (None, None) => violations.push(Violation::MissingCapacity(c.id.clone())),
            _ => {}
        }
        *outlets.entry(c.from.as_str()).or_default() += 1;
        *inlets.entry(c.to.as_str()).or_default() += 1;
        if nodes.contains_key(c.from.as_str()) && nodes.contains_key(c.to.as_str()) {
            node_edges.push((c.from.as_str(), c.to.as_str()));
        }
    }

    let mut movement_owner: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for g in &network.conflict_groups {
        match build_conflict_gadget(g, network) {
            Ok(_) => {}
            Err(e) => {
                violations.push(Violation::Gadget {
                    group: g.id.clone(),
                    detail: e.to_string(),
                });
                well_formed = false;
                continue;
            }
        }
        let mut senders = BTreeSet::new();
        let mut receivers = BTreeSet::new();
        for m in &g.movements {
            if let Some(prev) =
                movement_owner.insert((m.from.as_str(), m.to.as_str()), g.id.as_str())
            {
                if prev != g.id {
                    violations.push(Violation::SharedMovement {
                        from: m.from.clone(),
                        to: m.to.clone(),
                    });
                }
            }
            senders.insert(m.from.as_str());
            receivers.insert(m.to.as_str());
            if pairs.contains(&(m.from.as_str(), m.to.as_str())) {
                violations.push(Violation::Gadget {
                    group: g.id.clone(),
                    detail: format!("movement {}->{} duplicates a plain connector", m.from, m.to),
                });
            }
        }
        for s in senders {
            *outlets.entry(s).or_default() += 1;
        }
        for r in receivers {
            *inlets.entry(r).or_default() += 1;
        }
    }

    for c in &network.cells {
        let out = outlets.get(c.id.as_str()).copied().unwrap_or(0);
        let inn = inlets.get(c.id.as_str()).copied().unwrap_or(0);
        let (out_ok, in_ok) = match c.kind {
            CellKind::Source => (out == 1, inn == 0),
            CellKind::Ordinary => (out == 1, inn == 1),
            CellKind::Sink => (out == 0, inn == 1),
        };
        if !out_ok {
            violations.push(Violation::Outlets {
                cell: c.id.clone(),
                kind: c.kind,
                count: out,
            });
        }
        if !in_ok {
            violations.push(Violation::Inlets {
                cell: c.id.clone(),
                kind: c.kind,
                count: inn,
            });
        }
    }

    for n in &network.nodes {
        let out = outlets.get(n.id.as_str()).copied().unwrap_or(0);
        let inn = inlets.get(n.id.as_str()).copied().unwrap_or(0);
        match n.kind {
            NodeKind::Diverge if inn != 1 || out == 0 => {
                violations.push(Violation::DivergeDegree {
                    node: n.id.clone(),
                    inbound: inn,
                    outbound: out,
                })
            }
            NodeKind::Merge if inn == 0 || out != 1 => violations.push(Violation::MergeDegree {
                node: n.id.clone(),
                inbound: inn,
                outbound: out,
            }),
            _ => {}
        }
    }

    // Node-to-node connectors live inside one time layer and must be acyclic.
    {
        let mut indeg: HashMap<&str, usize> =
            network.nodes.iter().map(|n| (n.id.as_str(), 0)).collect();
        let mut out: HashMap<&str, Vec<&str>> = HashMap::new();
        for &(a, b) in &node_edges {
            *indeg.get_mut(b).unwrap() += 1;
            out.entry(a).or_default().push(b);
        }
        let mut queue: VecDeque<&str> = network
            .nodes
            .iter()
            .map(|n| n.id.as_str())
            .filter(|id| indeg[id] == 0)
            .collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &w in out.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                let d = indeg.get_mut(w).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(w);
                }
            }
        }
        if seen < network.nodes.len() {
            let stuck = network
                .nodes
                .iter()
                .find(|n| indeg[n.id.as_str()] > 0)
                .map(|n| n.id.clone())
                .unwrap_or_default();
            violations.push(Violation::TransshipmentCycle(stuck));
        }
    }

    if well_formed {
        let (_, down) = network.adjacency();
        for src in network.cells.iter().filter(|c| c.kind == CellKind::Source) {
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::from([src.id.as_str()]);
            let mut found = false;
            while let Some(v) = queue.pop_front() {
                if !seen.insert(v) {
                    continue;
                }
                if cells.get(v).map(|c| c.kind) == Some(CellKind::Sink) {
                    found = true;
                    break;
                }
                for w in down.get(v).into_iter().flatten() {
                    queue.push_back(w.as_str());
                }
            }
            if !found {
                violations.push(Violation::UnreachableSink(src.id.clone()));
            }
        }
    }

    ValidationReport { violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntersectionKind {
    Conflict,
    Diverge,
    Merge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionDegree {
    pub id: String,
    pub kind: IntersectionKind,
    pub inbound: usize,
    pub outbound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSummary {
    pub intersections: Vec<IntersectionDegree>,
    /// `(inbound, outbound)` → number of intersections.
    pub histogram: BTreeMap<(usize, usize), usize>,
    /// All intersections share one `(inbound, outbound)` degree.
    pub uniform: bool,
}

/// Per-intersection degrees. Conflict groups count their distinct sending
/// and receiving cells; diverge and merge nodes count their connectors.
pub fn degree_statistics(network: &RoadNetwork) -> DegreeSummary {
    let mut intersections = Vec::new();
    for g in &network.conflict_groups {
        let senders: BTreeSet<&str> = g.movements.iter().map(|m| m.from.as_str()).collect();
        let receivers: BTreeSet<&str> = g.movements.iter().map(|m| m.to.as_str()).collect();
        intersections.push(IntersectionDegree {
            id: g.id.clone(),
            kind: IntersectionKind::Conflict,
            inbound: senders.len(),
            outbound: receivers.len(),
        });
    }
    for n in &network.nodes {
        let kind = match n.kind {
            NodeKind::Diverge => IntersectionKind::Diverge,
            NodeKind::Merge => IntersectionKind::Merge,
            _ => continue,
        };
        let inbound = network.connectors.iter().filter(|c| c.to == n.id).count();
        let outbound = network.connectors.iter().filter(|c| c.from == n.id).count();
        intersections.push(IntersectionDegree {
            id: n.id.clone(),
            kind,
            inbound,
            outbound,
        });
    }
    let mut histogram = BTreeMap::new();
    for i in &intersections {
        *histogram.entry((i.inbound, i.outbound)).or_insert(0) += 1;
    }
    DegreeSummary {
        uniform: histogram.len() <= 1,
        intersections,
        histogram,
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two one-way approaches `w`, `s` crossing at one signalized gadget.
    pub fn crossing() -> RoadNetwork {
        crossing_with(5)
    }

    /// [`crossing`] with jam occupancy `n` on the receiving cells.
    pub fn crossing_with(n: u32) -> RoadNetwork {
        RoadNetwork {
            cells: vec![
                Cell::new("w", CellKind::Source, 5, 1),
                Cell::new("s", CellKind::Source, 5, 1),
                Cell::new("e", CellKind::Sink, n, 1),
                Cell::new("n", CellKind::Sink, n, 1),
            ],
            conflict_groups: vec![ConflictGroup::new(
                "x",
                vec![Movement::new("w", "e"), Movement::new("s", "n")],
            )],
            ..Default::default()
        }
    }

    /// `src -> a -> b -> snk`.
    pub fn corridor(cells: usize) -> RoadNetwork {
        let mut ids = vec!["src".to_string()];
        ids.extend((0..cells).map(|i| format!("c{i}")));
        ids.push("snk".to_string());
        let mut network = RoadNetwork::default();
        for (k, id) in ids.iter().enumerate() {
            let kind = if k == 0 {
                CellKind::Source
            } else if k + 1 == ids.len() {
                CellKind::Sink
            } else {
                CellKind::Ordinary
            };
            network.cells.push(Cell::new(id.clone(), kind, 5, 1));
        }
        for w in ids.windows(2) {
            network.connectors.push(Connector::new(
                format!("{}>{}", w[0], w[1]),
                w[0].clone(),
                w[1].clone(),
            ));
        }
        network
    }

    /// Two intersections in series: a main road crossed by two side streets,
    /// with a diverge before the first crossing.
    pub fn two_intersections() -> RoadNetwork {
        let cell = |id: &str, kind| Cell::new(id, kind, 5, 1);
        RoadNetwork {
            cells: vec![
                cell("m0", CellKind::Source),
                cell("m1", CellKind::Ordinary),
                cell("m2", CellKind::Ordinary),
                cell("m3", CellKind::Ordinary),
                cell("m4", CellKind::Sink),
                cell("t0", CellKind::Ordinary),
                cell("t1", CellKind::Sink),
                cell("a0", CellKind::Source),
                cell("a1", CellKind::Sink),
                cell("b0", CellKind::Source),
                cell("b1", CellKind::Sink),
            ],
            connectors: vec![
                Connector::new("m0>d", "m0", "d"),
                Connector::new("d>m1", "d", "m1"),
                Connector::new("d>t0", "d", "t0"),
                Connector::new("t0>t1", "t0", "t1"),
                Connector::new("m2>m3", "m2", "m3"),
            ],
            nodes: vec![TransshipmentNode::new("d", NodeKind::Diverge)],
            conflict_groups: vec![
                ConflictGroup::new(
                    "i1",
                    vec![Movement::new("m1", "m2"), Movement::new("a0", "a1")],
                ),
                ConflictGroup::new(
                    "i2",
                    vec![Movement::new("m3", "m4"), Movement::new("b0", "b1")],
                ),
            ],
            links: vec![],
        }
    }
}
