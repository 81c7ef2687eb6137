//! Pairwise net-conflict predicates and conflict graphs.
//!
//! Three strategies, from most to least conservative:
//!
//! * [`Strategy::BoundingBox`]: the closed 2D boxes around pins and segments
//!   intersect.
//! * [`Strategy::LayerAgnostic`]: same-orientation segments (or pins) share a
//!   cell in the 2D projection, whatever their layers; also anything the
//!   layer-aware rule flags.
//! * [`Strategy::LayerAware`]: the nets share a 3D cell, i.e. some pin or
//!   segment cell of one sits on the same layer and (x, y) as a pin or segment
//!   cell of the other. This is exactly what an [`OccupancyMap`] detects.
//!
//! Every layer-aware conflict is layer-agnostic, and every layer-agnostic
//! conflict is a bounding-box conflict.
//!
//! [`OccupancyMap`]: crate::occupancy::OccupancyMap

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{Net, NetId, Netlist, Orientation, Rect};
use crate::occupancy::{linear_unchecked, net_cells};

/// Above this net count, [`build_conflict_graph`] uses the indexed builder.
pub const ALL_PAIRS_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    BoundingBox,
    LayerAgnostic,
    LayerAware,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::BoundingBox,
        Strategy::LayerAgnostic,
        Strategy::LayerAware,
    ];

    pub fn conflicts(self, a: &Net, b: &Net) -> bool {
        match self {
            Strategy::BoundingBox => conflict_bbox(a, b),
            Strategy::LayerAgnostic => conflict_layer_agnostic(a, b),
            Strategy::LayerAware => conflict_layer_aware(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::BoundingBox => "bbox",
            Strategy::LayerAgnostic => "layer-agnostic",
            Strategy::LayerAware => "layer-aware",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Pin,
    Wire(Orientation),
}

#[derive(Debug, Clone, Copy)]
struct Element {
    kind: Kind,
    layer: u32,
    rect: Rect,
}

fn elements(net: &Net) -> impl Iterator<Item = Element> + '_ {
    let pins = net.pins().iter().map(|p| Element {
        kind: Kind::Pin,
        layer: p.layer,
        rect: Rect::point(p.x, p.y),
    });
    let segs = net.segments().iter().map(|s| Element {
        kind: Kind::Wire(s.orientation),
        layer: s.layer,
        rect: s.rect(),
    });
    pins.chain(segs)
}

pub fn conflict_bbox(a: &Net, b: &Net) -> bool {
    a.bbox().intersects(&b.bbox())
}

pub fn conflict_layer_aware(a: &Net, b: &Net) -> bool {
    elements(a).any(|e| elements(b).any(|f| e.layer == f.layer && e.rect.intersects(&f.rect)))
}

pub fn conflict_layer_agnostic(a: &Net, b: &Net) -> bool {
    elements(a).any(|e| {
        elements(b).any(|f| e.rect.intersects(&f.rect) && (e.kind == f.kind || e.layer == f.layer))
    })
}

/// Undirected conflict graph. Edges are stored once as `(lo, hi)`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConflictGraph {
    n: usize,
    edges: Vec<(NetId, NetId)>,
}

impl ConflictGraph {
    /// Normalizes, sorts and dedups the edges; self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NetId, NetId)>) -> Self {
        let mut edges: Vec<(NetId, NetId)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(NetId, NetId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: NetId, b: NetId) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    pub fn is_subgraph_of(&self, other: &ConflictGraph) -> bool {
        self.edges.iter().all(|&(a, b)| other.contains(a, b))
    }

    /// `<i> <j>` per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (a, b) in &self.edges {
            writeln!(w, "{a} {b}")?;
        }
        Ok(())
    }

    pub fn parse_edge_list<R: BufRead>(reader: R, n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ids: Vec<NetId> = line
                .split_whitespace()
                .map(|t| t.parse::<NetId>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(idx + 1, "edge endpoints must be net ids"))?;
            match ids[..] {
                [a, b] if (a as usize) < n && (b as usize) < n => edges.push((a, b)),
                [_, _] => return Err(Error::parse(idx + 1, "edge endpoint out of range")),
                _ => return Err(Error::parse(idx + 1, "expected `<i> <j>`")),
            }
        }
        Ok(Self::from_edges(n, edges))
    }
}

pub fn build_conflict_graph(netlist: &Netlist, strategy: Strategy) -> ConflictGraph {
    if netlist.len() <= ALL_PAIRS_LIMIT {
        build_conflict_graph_all_pairs(netlist, strategy)
    } else {
        build_conflict_graph_indexed(netlist, strategy)
    }
}

/// O(N²) reference construction.
pub fn build_conflict_graph_all_pairs(netlist: &Netlist, strategy: Strategy) -> ConflictGraph {
    let nets = netlist.nets();
    let boxes: Vec<Rect> = nets.iter().map(Net::bbox).collect();
    let edges: Vec<(NetId, NetId)> = (0..nets.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let boxes = &boxes;
            (i + 1..nets.len())
                .filter(move |&j| boxes[i].intersects(&boxes[j]))
                .filter(move |&j| strategy.conflicts(&nets[i], &nets[j]))
                .map(move |j| (i as NetId, j as NetId))
        })
        .collect();
    ConflictGraph::from_edges(nets.len(), edges)
}

/// Groups nets by the resources they touch, so only nets sharing a resource
/// are paired. Bounding boxes use an x-sorted sweep instead.
pub fn build_conflict_graph_indexed(netlist: &Netlist, strategy: Strategy) -> ConflictGraph {
    let n = netlist.len();
    match strategy {
        Strategy::BoundingBox => ConflictGraph::from_edges(n, bbox_sweep(netlist)),
        Strategy::LayerAware | Strategy::LayerAgnostic => {
            let agnostic = strategy == Strategy::LayerAgnostic;
            let grid = *netlist.grid();
            let mut keyed: Vec<(u64, NetId)> = netlist
                .nets()
                .par_iter()
                .flat_map_iter(|net| {
                    let mut keys: Vec<u64> = net_cells(net, &grid).collect();
                    if agnostic {
                        keys.extend(projected_keys(net, &grid));
                    }
                    keys.sort_unstable();
                    keys.dedup();
                    let id = net.id();
                    keys.into_iter().map(move |k| (k, id))
                })
                .collect();
            keyed.par_sort_unstable();
            let edges: Vec<(NetId, NetId)> = keyed
                .chunk_by(|a, b| a.0 == b.0)
                .filter(|g| g.len() > 1)
                .flat_map(|g| {
                    g.iter()
                        .enumerate()
                        .flat_map(move |(i, a)| g[i + 1..].iter().map(move |b| (a.1, b.1)))
                })
                .collect();
            ConflictGraph::from_edges(n, edges)
        }
    }
}

const TAG_SHIFT: u32 = 62;

/// 2D-projected resource keys: horizontal wire cells, vertical wire cells and
/// pin cells live in separate key spaces above the 3D cell indices.
fn projected_keys<'a>(net: &'a Net, grid: &'a crate::GridDims) -> impl Iterator<Item = u64> + 'a {
    let pins = net
        .pins()
        .iter()
        .map(move |p| (3u64 << TAG_SHIFT) | linear_unchecked(p.x, p.y, 0, grid));
    let wires = net.segments().iter().flat_map(move |s| {
        let tag = match s.orientation {
            Orientation::Horizontal => 1u64,
            Orientation::Vertical => 2u64,
        };
        s.cells()
            .map(move |(x, y)| (tag << TAG_SHIFT) | linear_unchecked(x, y, 0, grid))
    });
    pins.chain(wires)
}

fn bbox_sweep(netlist: &Netlist) -> Vec<(NetId, NetId)> {
    let mut boxes: Vec<(Rect, NetId)> = netlist.nets().iter().map(|n| (n.bbox(), n.id())).collect();
    boxes.sort_unstable_by_key(|(r, id)| (r.x0, *id));
    let mut active: Vec<(Rect, NetId)> = Vec::new();
    let mut edges = Vec::new();
    for (r, id) in boxes {
        active.retain(|(a, _)| a.x1 >= r.x0);
        for (a, other) in &active {
            if a.y0 <= r.y1 && r.y0 <= a.y1 {
                edges.push((*other, id));
            }
        }
        active.push((r, id));
    }
    edges
}
