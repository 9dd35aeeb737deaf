#![allow(dead_code)]

use rand::Rng;
use sigtamper_core::{
    expand, Cell, CellKind, ConflictGroup, Connector, DemandProfile, Horizon, Movement,
    RoadNetwork, SinkCapacityPolicy, SuperGraph,
};
use std::collections::BTreeMap;

fn connect(net: &mut RoadNetwork, from: &str, to: &str) {
    net.connectors
        .push(Connector::new(format!("{from}>{to}"), from, to));
}

/// One gadget: `w -> e` crosses `s -> n`.
pub fn crossing(receiving: u32) -> RoadNetwork {
    RoadNetwork {
        cells: vec![
            Cell::new("w", CellKind::Source, 5, 1),
            Cell::new("s", CellKind::Source, 5, 1),
            Cell::new("e", CellKind::Sink, receiving, 1),
            Cell::new("n", CellKind::Sink, receiving, 1),
        ],
        conflict_groups: vec![ConflictGroup::new(
            "x",
            vec![Movement::new("w", "e"), Movement::new("s", "n")],
        )],
        ..Default::default()
    }
}

/// Two gadgets in series on a main road `m`, each crossed by a side street.
pub fn two_gadgets(receiving: u32) -> RoadNetwork {
    let mut net = RoadNetwork::default();
    for (id, kind, n) in [
        ("m0", CellKind::Source, 5),
        ("m1", CellKind::Ordinary, receiving),
        ("m2", CellKind::Ordinary, receiving),
        ("m3", CellKind::Sink, receiving),
        ("a0", CellKind::Source, 5),
        ("a1", CellKind::Sink, receiving),
        ("b0", CellKind::Source, 5),
        ("b1", CellKind::Sink, receiving),
    ] {
        net.cells.push(Cell::new(id, kind, n, 1));
    }
    connect(&mut net, "m1", "m2");
    net.conflict_groups = vec![
        ConflictGroup::new(
            "x0",
            vec![Movement::new("m0", "m1"), Movement::new("a0", "a1")],
        ),
        ConflictGroup::new(
            "x1",
            vec![Movement::new("m2", "m3"), Movement::new("b0", "b1")],
        ),
    ];
    net
}

/// Places `total` vehicles at random steps of random sources.
pub fn random_demand<R: Rng>(
    rng: &mut R,
    net: &RoadNetwork,
    steps: u32,
    total: u32,
) -> DemandProfile {
    let sources: Vec<&str> = net
        .cells
        .iter()
        .filter(|c| c.kind == CellKind::Source)
        .map(|c| c.id.as_str())
        .collect();
    let mut arrivals: BTreeMap<String, Vec<u32>> = sources
        .iter()
        .map(|s| (s.to_string(), vec![0; steps as usize]))
        .collect();
    for _ in 0..total {
        let s = sources[rng.gen_range(0..sources.len())];
        let t = rng.gen_range(0..steps.min(3)) as usize;
        arrivals.get_mut(s).unwrap()[t] += 1;
    }
    DemandProfile { arrivals }
}

/// At most two gadgets, `|T| <= 8`, `D <= 4`.
pub fn micro_instance<R: Rng>(rng: &mut R) -> (String, SuperGraph) {
    let receiving = rng.gen_range(1..=2);
    let two = rng.gen_bool(0.4);
    let (net, steps, total) = if two {
        (
            two_gadgets(receiving),
            rng.gen_range(3..=5),
            rng.gen_range(1..=3),
        )
    } else {
        (
            crossing(receiving),
            rng.gen_range(2..=8),
            rng.gen_range(1..=4),
        )
    };
    let d = random_demand(rng, &net, steps, total);
    let g = expand(
        &net,
        Horizon::new(steps, 1.0),
        &d,
        SinkCapacityPolicy::Uncapacitated,
    )
    .expect("micro instance expands");
    let label = format!(
        "{} N={receiving} T={steps} D={total}",
        if two { "two-gadget" } else { "crossing" }
    );
    (label, g)
}

/// `rows x cols` grid with one-way roads in alternating directions and
/// `cells` cells per link.
pub fn grid(rows: usize, cols: usize, cells: usize, occupancy: u32, capacity: u32) -> RoadNetwork {
    let mut net = RoadNetwork::default();
    let cell = |id: String, kind| Cell::new(id, kind, occupancy, capacity);
    let mut groups: BTreeMap<(usize, usize), Vec<Movement>> = BTreeMap::new();
    let roads = (0..rows)
        .map(|r| (format!("h{r}"), cols, r))
        .chain((0..cols).map(|c| (format!("v{c}"), rows, rows + c)));
    for (road, crossings, k) in roads {
        let src = format!("{road}.src");
        let snk = format!("{road}.snk");
        net.cells.push(cell(src.clone(), CellKind::Source));
        net.cells.push(cell(snk.clone(), CellKind::Sink));
        let mut prev = src;
        for l in 0..=crossings {
            let ids: Vec<String> = (0..cells).map(|j| format!("{road}.{l}.{j}")).collect();
            for id in &ids {
                net.cells.push(cell(id.clone(), CellKind::Ordinary));
            }
            if l == 0 {
                connect(&mut net, &prev, &ids[0]);
            } else {
                let along = if k % 2 == 0 { l - 1 } else { crossings - l };
                let at = if k < rows {
                    (k, along)
                } else {
                    (along, k - rows)
                };
                groups
                    .entry(at)
                    .or_default()
                    .push(Movement::new(prev.clone(), ids[0].clone()));
            }
            for w in ids.windows(2) {
                connect(&mut net, &w[0], &w[1]);
            }
            prev = ids[cells - 1].clone();
        }
        connect(&mut net, &prev, &snk);
    }
    net.conflict_groups = groups
        .into_iter()
        .map(|((r, c), m)| ConflictGroup::new(format!("i{r}.{c}"), m))
        .collect();
    net
}

/// A random grid of up to 3x3 intersections with `|T| <= 60`.
pub fn random_grid_instance<R: Rng>(rng: &mut R) -> (String, SuperGraph) {
    let rows = rng.gen_range(1..=3);
    let cols = rng.gen_range(1..=3);
    let cells = rng.gen_range(1..=3);
    let capacity = rng.gen_range(1..=2);
    let occupancy = rng.gen_range(capacity..=5);
    let steps = rng.gen_range(4..=60);
    let net = grid(rows, cols, cells, occupancy, capacity);
    let sources: Vec<String> = net
        .cells
        .iter()
        .filter(|c| c.kind == CellKind::Source)
        .map(|c| c.id.clone())
        .collect();
    let arrivals = sources
        .into_iter()
        .map(|s| {
            let series = (0..steps).map(|_| rng.gen_range(0..=1)).collect();
            (s, series)
        })
        .collect();
    let policy = if rng.gen_bool(0.5) {
        SinkCapacityPolicy::Uncapacitated
    } else {
        SinkCapacityPolicy::Occupancy
    };
    let g = expand(
        &net,
        Horizon::new(steps, 2.0),
        &DemandProfile { arrivals },
        policy,
    )
    .expect("grid expands");
    (
        format!("{rows}x{cols} cells={cells} N={occupancy} Q={capacity} T={steps} {policy:?}"),
        g,
    )
}

/// `d` vehicles at every source in the first step.
pub fn burst(net: &RoadNetwork, d: u32, steps: u32) -> DemandProfile {
    DemandProfile {
        arrivals: net
            .cells
            .iter()
            .filter(|c| c.kind == CellKind::Source)
            .map(|c| {
                let mut v = vec![0; steps as usize];
                v[0] = d;
                (c.id.clone(), v)
            })
            .collect(),
    }
}

/// Single-vehicle receiving cells, two vehicles per approach, six steps.
pub fn crossing_toy() -> SuperGraph {
    let net = crossing(1);
    expand(
        &net,
        Horizon::new(6, 1.0),
        &burst(&net, 2, 6),
        SinkCapacityPolicy::Uncapacitated,
    )
    .expect("toy expands")
}
