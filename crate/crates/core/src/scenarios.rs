//! Test networks A–D, uniform source demand, and reproducible run configs.
//!
//! Grids A–C are `n × n` one-way single-lane grids whose rows and columns
//! alternate direction. Every road has a source cell before its first link
//! and a sink cell after its last one, and every crossing is one conflict
//! gadget. D is a seeded irregular network with the same aggregate shape as
//! a dense downtown patch.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    validate, Cell, CellKind, ConflictGroup, Connector, Link, Movement, RoadNetwork,
};
use crate::supergraph::{
    expand, DemandProfile, ExpandError, Horizon, SinkCapacityPolicy, SuperGraph,
};

/// Bounding-box area shared by all generated networks.
pub const NOMINAL_AREA_KM2: f64 = 2.5;
/// Attack durations in steps: 10, 15 and 20 minutes at 2 s per step.
pub const DURATION_PRESETS: [u32; 3] = [300, 450, 600];
/// Low, medium and high demand in vehicles per hour per source.
pub const DEMAND_PRESETS: [u32; 3] = [400, 800, 1200];
/// Attempts before [`generate_irregular`] gives up on a seed.
pub const MAX_RETRIES: u32 = 1000;

const D_INTERSECTIONS: usize = 23;
const D_SOURCES: usize = 9;
const D_SINKS: usize = 8;
const D_LINK_LENGTH_M: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("no valid irregular network for seed {seed} after {attempts} attempts")]
    GeneratorFailure { seed: u64, attempts: u32 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Expand(#[from] ExpandError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GridKind {
    A,
    B,
    C,
}

impl GridKind {
    pub fn size(self) -> usize {
        match self {
            GridKind::A => 2,
            GridKind::B => 3,
            GridKind::C => 4,
        }
    }

    pub fn link_length_m(self) -> f64 {
        match self {
            GridKind::A => 500.0,
            GridKind::B => 375.0,
            GridKind::C => 250.0,
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Cell parameters shared by every generated cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub max_occupancy: u32,
    pub flow_capacity: u32,
    /// Meters one vehicle covers in one step at free flow.
    pub cell_length_m: f64,
}

impl Default for CellParams {
    fn default() -> Self {
        Self {
            max_occupancy: 5,
            flow_capacity: 1,
            cell_length_m: 50.0,
        }
    }
}

impl CellParams {
    pub fn cells_for(&self, length_m: f64) -> usize {
        ((length_m / self.cell_length_m).round() as usize).max(1)
    }
}

/// Appends a link of `count` ordinary cells named `{id}.{k}`.
fn push_link(net: &mut RoadNetwork, id: &str, length_m: f64, p: &CellParams) -> Vec<String> {
    let cells: Vec<String> = (0..p.cells_for(length_m))
        .map(|k| format!("{id}.{k}"))
        .collect();
    for c in &cells {
        net.cells.push(Cell::new(
            c.clone(),
            CellKind::Ordinary,
            p.max_occupancy,
            p.flow_capacity,
        ));
    }
    for w in cells.windows(2) {
        net.connectors.push(Connector::new(
            format!("{}>{}", w[0], w[1]),
            w[0].clone(),
            w[1].clone(),
        ));
    }
    net.links.push(Link {
        id: id.to_string(),
        length_m,
        cells: cells.clone(),
    });
    cells
}

fn push_terminal(net: &mut RoadNetwork, id: String, kind: CellKind, p: &CellParams) {
    net.cells
        .push(Cell::new(id, kind, p.max_occupancy, p.flow_capacity));
}

fn connect(net: &mut RoadNetwork, from: &str, to: &str) {
    net.connectors
        .push(Connector::new(format!("{from}>{to}"), from, to));
}

/// One-way grid A, B or C with `p` applied to every cell.
pub fn generate_regular_grid_with(kind: GridKind, p: &CellParams) -> RoadNetwork {
    let n = kind.size();
    let len = kind.link_length_m();
    let mut net = RoadNetwork::default();
    // links[road][k] are the cells of the k-th link along the travel direction.
    let mut roads: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for name in ["h", "v"] {
        for r in 0..n {
            let road = format!("{name}{r}");
            let src = format!("{road}.src");
            let snk = format!("{road}.snk");
            push_terminal(&mut net, src.clone(), CellKind::Source, p);
            let links: Vec<Vec<String>> = (0..=n)
                .map(|k| push_link(&mut net, &format!("{road}.{k}"), len, p))
                .collect();
            push_terminal(&mut net, snk.clone(), CellKind::Sink, p);
            connect(&mut net, &src, &links[0][0]);
            connect(&mut net, links[n].last().unwrap(), &snk);
            roads.push((road, links));
        }
    }
    // Row r runs east when r is even; column c runs south when c is even.
    // Along a road, the k-th intersection sits between links k and k+1.
    let along = |road: usize, cross: usize| if road % 2 == 0 { cross } else { n - 1 - cross };
    for r in 0..n {
        for c in 0..n {
            let h = &roads[r].1;
            let v = &roads[n + c].1;
            let kh = along(r, c);
            let kv = along(c, r);
            net.conflict_groups.push(ConflictGroup::new(
                format!("i{r}.{c}"),
                vec![
                    Movement::new(h[kh].last().unwrap().clone(), h[kh + 1][0].clone()),
                    Movement::new(v[kv].last().unwrap().clone(), v[kv + 1][0].clone()),
                ],
            ));
        }
    }
    net
}

pub fn generate_regular_grid(kind: GridKind) -> RoadNetwork {
    generate_regular_grid_with(kind, &CellParams::default())
}

/// Seeded irregular network D: 23 intersections on a pruned, jittered
/// lattice with random one-way directions, 9 source and 8 sink roads, and
/// link lengths near 100 m.
pub fn generate_irregular_with(seed: u64, p: &CellParams) -> Result<RoadNetwork, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        if let Some(net) = try_irregular(&mut rng, p) {
            return Ok(net);
        }
    }
    Err(ScenarioError::GeneratorFailure {
        seed,
        attempts: MAX_RETRIES,
    })
}

pub fn generate_irregular(seed: u64) -> Result<RoadNetwork, ScenarioError> {
    generate_irregular_with(seed, &CellParams::default())
}

fn try_irregular(rng: &mut ChaCha8Rng, p: &CellParams) -> Option<RoadNetwork> {
    const SIDE: usize = 5;
    let mut sites: Vec<(usize, usize)> = (0..SIDE)
        .flat_map(|r| (0..SIDE).map(move |c| (r, c)))
        .collect();
    sites.shuffle(rng);
    sites.truncate(D_INTERSECTIONS);
    sites.sort();
    let index: BTreeMap<(usize, usize), usize> =
        sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (&(r, c), &i) in &index {
        for nb in [(r + 1, c), (r, c + 1)] {
            if let Some(&j) = index.get(&nb) {
                edges.push((i, j));
            }
        }
    }
    // Prune up to a quarter of the lattice edges, keeping the graph
    // connected and every intersection at degree three or more.
    edges.shuffle(rng);
    let mut degree = [0usize; D_INTERSECTIONS];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut kept = edges.clone();
    for e in edges.iter().take(edges.len() / 4) {
        if degree[e.0] < 4 || degree[e.1] < 4 {
            continue;
        }
        let trial: Vec<_> = kept.iter().copied().filter(|x| x != e).collect();
        if connected(D_INTERSECTIONS, &trial) {
            kept = trial;
            degree[e.0] -= 1;
            degree[e.1] -= 1;
        }
    }
    // Boundary roads go to distinct intersections, degree-two ones first.
    let mut order: Vec<usize> = (0..D_INTERSECTIONS).filter(|&i| degree[i] < 4).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| degree[i] > 2);
    if order.len() < D_SOURCES + D_SINKS
        || order
            .iter()
            .skip(D_SOURCES + D_SINKS)
            .any(|&i| degree[i] < 3)
    {
        return None;
    }
    let boundary = &order[..D_SOURCES + D_SINKS];
    let mut ends = boundary.to_vec();
    ends.shuffle(rng);
    let sources = &ends[..D_SOURCES];
    let sinks = &ends[D_SOURCES..];

    let mut arcs: Vec<(usize, usize)> = kept
        .iter()
        .map(|&(a, b)| if rng.gen_bool(0.5) { (a, b) } else { (b, a) })
        .collect();
    let mut inn = [0usize; D_INTERSECTIONS];
    let mut out = [0usize; D_INTERSECTIONS];
    for &(a, b) in &arcs {
        out[a] += 1;
        inn[b] += 1;
    }
    for &s in sources {
        inn[s] += 1;
    }
    for &s in sinks {
        out[s] += 1;
    }
    // Flip arcs at intersections lacking an inlet or an outlet, as long as
    // the other end keeps both.
    for _ in 0..4 * arcs.len() {
        let Some(v) = (0..D_INTERSECTIONS).find(|&i| inn[i] == 0 || out[i] == 0) else {
            break;
        };
        let needs_in = inn[v] == 0;
        let candidates: Vec<usize> = (0..arcs.len())
            .filter(|&k| {
                let (a, b) = arcs[k];
                if needs_in {
                    a == v && inn[b] > 1
                } else {
                    b == v && out[a] > 1
                }
            })
            .collect();
        let &k = candidates.choose(rng)?;
        let (a, b) = arcs[k];
        out[a] -= 1;
        inn[b] -= 1;
        arcs[k] = (b, a);
        out[b] += 1;
        inn[a] += 1;
    }
    if (0..D_INTERSECTIONS).any(|i| inn[i] == 0 || out[i] == 0) {
        return None;
    }
    if !all_on_source_sink_paths(&arcs, sources, sinks) {
        return None;
    }

    let mut net = RoadNetwork::default();
    let mut length = || D_LINK_LENGTH_M * rng.gen_range(0.85..1.15);
    // Per intersection: last cells of inbound links and first cells of outbound links.
    let mut ins: Vec<Vec<String>> = vec![Vec::new(); D_INTERSECTIONS];
    let mut outs: Vec<Vec<String>> = vec![Vec::new(); D_INTERSECTIONS];
    for (k, &s) in sources.iter().enumerate() {
        let src = format!("o{k}.src");
        push_terminal(&mut net, src.clone(), CellKind::Source, p);
        let cells = push_link(&mut net, &format!("o{k}"), length(), p);
        connect(&mut net, &src, &cells[0]);
        ins[s].push(cells.last().unwrap().clone());
    }
    for (k, &(a, b)) in arcs.iter().enumerate() {
        let cells = push_link(&mut net, &format!("l{k}"), length(), p);
        outs[a].push(cells[0].clone());
        ins[b].push(cells.last().unwrap().clone());
    }
    for (k, &s) in sinks.iter().enumerate() {
        let snk = format!("e{k}.snk");
        let cells = push_link(&mut net, &format!("e{k}"), length(), p);
        push_terminal(&mut net, snk.clone(), CellKind::Sink, p);
        connect(&mut net, cells.last().unwrap(), &snk);
        outs[s].push(cells[0].clone());
    }
    for i in 0..D_INTERSECTIONS {
        // Pair inbound and outbound cells round-robin so each appears in a
        // movement; the gadget lets any sender reach any receiver.
        let k = ins[i].len().max(outs[i].len());
        let movements = (0..k)
            .map(|j| {
                Movement::new(
                    ins[i][j % ins[i].len()].clone(),
                    outs[i][j % outs[i].len()].clone(),
                )
            })
            .collect();
        net.conflict_groups
            .push(ConflictGroup::new(format!("i{i}"), movements));
    }
    validate(&net).is_pass().then_some(net)
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Every intersection is reachable from a source road and reaches a sink road.
fn all_on_source_sink_paths(arcs: &[(usize, usize)], sources: &[usize], sinks: &[usize]) -> bool {
    let reach = |starts: &[usize], forward: bool| {
        let mut seen = vec![false; D_INTERSECTIONS];
        let mut queue: VecDeque<usize> = starts.iter().copied().collect();
        for &s in starts {
            seen[s] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &(a, b) in arcs {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == v && !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(sources, true) && reach(sinks, false)
}

/// Uniform arrivals at `rate` vehicles per hour on every source cell.
///
/// Step `t` receives `⌊rate·(t+1)·Δτ/3600⌋ - ⌊rate·t·Δτ/3600⌋` vehicles, so
/// totals are exact whenever the horizon's expected count is integral.
pub fn demand_profile(
    network: &RoadNetwork,
    rate_veh_per_hr: u32,
    horizon: Horizon,
) -> DemandProfile {
    let step_ms = (horizon.delta_tau * 1000.0).round() as u128;
    let cum = |t: u128| rate_veh_per_hr as u128 * t * step_ms / 3_600_000;
    let series: Vec<u32> = (0..horizon.steps as u128)
        .map(|t| (cum(t + 1) - cum(t)) as u32)
        .collect();
    DemandProfile {
        arrivals: network
            .cells
            .iter()
            .filter(|c| c.kind == CellKind::Source)
            .map(|c| (c.id.clone(), series.clone()))
            .collect(),
    }
}

/// Which network a scenario runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum NetworkSpec {
    Grid {
        kind: GridKind,
    },
    Irregular {
        seed: u64,
    },
    /// Two one-way approaches crossing at a single gadget.
    Crossing {
        receiving_occupancy: u32,
    },
    /// A network description stored in a JSON file, relative to the
    /// scenario file.
    File {
        path: String,
    },
}

impl NetworkSpec {
    pub fn label(&self) -> String {
        match self {
            NetworkSpec::Grid { kind } => kind.to_string(),
            NetworkSpec::Irregular { .. } => "D".into(),
            NetworkSpec::Crossing { .. } => "crossing".into(),
            NetworkSpec::File { path } => Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.clone()),
        }
    }
}

impl FromStr for NetworkSpec {
    type Err = ScenarioError;

    /// `A`, `B`, `C`, `D:<seed>` or `crossing`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(NetworkSpec::Grid { kind: GridKind::A }),
            "B" => Ok(NetworkSpec::Grid { kind: GridKind::B }),
            "C" => Ok(NetworkSpec::Grid { kind: GridKind::C }),
            "crossing" => Ok(NetworkSpec::Crossing {
                receiving_occupancy: 1,
            }),
            _ => match s.strip_prefix("D:").map(str::parse) {
                Some(Ok(seed)) => Ok(NetworkSpec::Irregular { seed }),
                _ => Err(ScenarioError::Invalid(format!(
                    "unknown network {s:?}; expected A, B, C, D:<seed> or crossing"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandSpec {
    /// Vehicles per hour at every source, spread over the horizon.
    Uniform { veh_per_hr: u32 },
    /// Arrivals per source and step.
    Explicit {
        arrivals: BTreeMap<String, Vec<u32>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub network: NetworkSpec,
    #[serde(default = "defaults::delta_tau")]
    pub delta_tau: f64,
    pub horizon_steps: u32,
    #[serde(default = "defaults::max_occupancy")]
    pub cell_max_occupancy: u32,
    #[serde(default = "defaults::flow_capacity")]
    pub cell_flow_capacity: u32,
    /// km/h.
    #[serde(default = "defaults::free_flow_speed")]
    pub free_flow_speed: f64,
    pub demand: DemandSpec,
    #[serde(default)]
    pub sink_capacity_policy: SinkCapacityPolicy,
}

mod defaults {
    pub fn delta_tau() -> f64 {
        2.0
    }
    pub fn max_occupancy() -> u32 {
        5
    }
    pub fn flow_capacity() -> u32 {
        1
    }
    pub fn free_flow_speed() -> f64 {
        90.0
    }
}

/// A scenario's network and demand, ready to expand.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub network: RoadNetwork,
    pub horizon: Horizon,
    pub demand: DemandProfile,
    pub policy: SinkCapacityPolicy,
}

impl Instance {
    pub fn expand(&self) -> Result<SuperGraph, ScenarioError> {
        Ok(expand(
            &self.network,
            self.horizon,
            &self.demand,
            self.policy,
        )?)
    }
}

impl ScenarioConfig {
    pub fn new(network: NetworkSpec, horizon_steps: u32, demand: DemandSpec) -> Self {
        Self {
            network,
            delta_tau: defaults::delta_tau(),
            horizon_steps,
            cell_max_occupancy: defaults::max_occupancy(),
            cell_flow_capacity: defaults::flow_capacity(),
            free_flow_speed: defaults::free_flow_speed(),
            demand,
            sink_capacity_policy: SinkCapacityPolicy::default(),
        }
    }

    pub fn uniform(network: NetworkSpec, horizon_steps: u32, veh_per_hr: u32) -> Self {
        Self::new(network, horizon_steps, DemandSpec::Uniform { veh_per_hr })
    }

    pub fn from_json(s: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn horizon(&self) -> Horizon {
        Horizon::new(self.horizon_steps, self.delta_tau)
    }

    pub fn cell_params(&self) -> CellParams {
        CellParams {
            max_occupancy: self.cell_max_occupancy,
            flow_capacity: self.cell_flow_capacity,
            cell_length_m: self.free_flow_speed / 3.6 * self.delta_tau,
        }
    }

    pub fn demand_rate(&self) -> Option<u32> {
        match &self.demand {
            DemandSpec::Uniform { veh_per_hr } => Some(*veh_per_hr),
            DemandSpec::Explicit { .. } => None,
        }
    }

    fn check(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::Invalid(m.to_string()));
        if !(self.delta_tau > 0.0 && self.delta_tau.is_finite()) {
            return bad("delta_tau must be positive");
        }
        if self.horizon_steps == 0 {
            return bad("horizon_steps must be positive");
        }
        if self.cell_flow_capacity == 0 || self.cell_max_occupancy < self.cell_flow_capacity {
            return bad("need 0 < cell_flow_capacity <= cell_max_occupancy");
        }
        if !(self.free_flow_speed > 0.0 && self.free_flow_speed.is_finite()) {
            return bad("free_flow_speed must be positive");
        }
        Ok(())
    }

    /// Builds the network and demand; `base` resolves relative file paths.
    pub fn instantiate(&self, base: Option<&Path>) -> Result<Instance, ScenarioError> {
        self.check()?;
        let p = self.cell_params();
        let network = match &self.network {
            NetworkSpec::Grid { kind } => generate_regular_grid_with(*kind, &p),
            NetworkSpec::Irregular { seed } => generate_irregular_with(*seed, &p)?,
            NetworkSpec::Crossing {
                receiving_occupancy,
            } => crossing(*receiving_occupancy, &p),
            NetworkSpec::File { path } => {
                let full = base.map(|b| b.join(path)).unwrap_or_else(|| path.into());
                let text = std::fs::read_to_string(&full).map_err(|source| ScenarioError::Io {
                    path: full.display().to_string(),
                    source,
                })?;
                RoadNetwork::from_json(&text).map_err(|e| ScenarioError::Invalid(e.to_string()))?
            }
        };
        let report = validate(&network);
        if !report.is_pass() {
            return Err(ScenarioError::Invalid(report.to_string()));
        }
        let horizon = self.horizon();
        let demand = match &self.demand {
            DemandSpec::Uniform { veh_per_hr } => demand_profile(&network, *veh_per_hr, horizon),
            DemandSpec::Explicit { arrivals } => DemandProfile {
                arrivals: arrivals.clone(),
            },
        };
        Ok(Instance {
            label: self.network.label(),
            network,
            horizon,
            demand,
            policy: self.sink_capacity_policy,
        })
    }
}

/// Crossing toy: sources `w`, `s` and sinks `e`, `n` around one gadget.
pub fn crossing(receiving_occupancy: u32, p: &CellParams) -> RoadNetwork {
    let mut net = RoadNetwork::default();
    for (id, kind, n) in [
        ("w", CellKind::Source, p.max_occupancy),
        ("s", CellKind::Source, p.max_occupancy),
        ("e", CellKind::Sink, receiving_occupancy),
        ("n", CellKind::Sink, receiving_occupancy),
    ] {
        net.cells.push(Cell::new(id, kind, n, p.flow_capacity));
    }
    net.conflict_groups.push(ConflictGroup::new(
        "x",
        vec![Movement::new("w", "e"), Movement::new("s", "n")],
    ));
    net
}

/// Aggregate shape of a generated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub intersections: usize,
    pub links: usize,
    pub mean_link_length_m: f64,
    pub sources: usize,
    pub sinks: usize,
    pub cells: usize,
    pub uniform_degree: bool,
}

pub fn summarize(network: &RoadNetwork) -> NetworkSummary {
    let count = |k: CellKind| network.cells.iter().filter(|c| c.kind == k).count();
    let links = network.links.len();
    let total: f64 = network.links.iter().map(|l| l.length_m).sum();
    NetworkSummary {
        intersections: network.conflict_groups.len(),
        links,
        mean_link_length_m: if links == 0 {
            0.0
        } else {
            total / links as f64
        },
        sources: count(CellKind::Source),
        sinks: count(CellKind::Sink),
        cells: network.cells.len(),
        uniform_degree: crate::network::degree_statistics(network).uniform,
    }
}
