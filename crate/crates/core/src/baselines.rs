//! Greedy first-fit batching under each overlap strategy.
//!
//! Nets are taken in ascending id and dropped into the first batch they do
//! not conflict with; a new batch is opened when none fits. The layer-aware
//! and layer-agnostic variants track per-batch occupancy; the bounding-box
//! variant compares boxes pairwise. [`greedy_first_fit_pairwise`] is the
//! literal all-members reference used to check them.

use crate::netlist::{GridDims, Net, NetId, Netlist, Orientation, Rect};
use crate::occupancy::{linear_unchecked, select_representation, OccupancyMap, Representation};
use crate::overlap::Strategy;
use crate::reallocator::BatchingResult;

trait BatchFootprint {
    fn collides(&self, net: &Net) -> bool;
    fn add(&mut self, net: &Net);
}

struct LayerAwareBatch(OccupancyMap);

impl BatchFootprint for LayerAwareBatch {
    fn collides(&self, net: &Net) -> bool {
        self.0.collides(net)
    }

    fn add(&mut self, net: &Net) {
        self.0.mark_net_unchecked(net);
    }
}

/// 3D cells plus three projected planes: horizontal wires, vertical wires,
/// and pins.
struct LayerAgnosticBatch {
    cells: OccupancyMap,
    planes: [OccupancyMap; 3],
    flat: GridDims,
}

impl LayerAgnosticBatch {
    fn new(grid: GridDims, rep: Representation) -> Self {
        let flat = GridDims { layers: 1, ..grid };
        Self {
            cells: OccupancyMap::new(grid, rep),
            planes: std::array::from_fn(|_| OccupancyMap::new(flat, rep)),
            flat,
        }
    }

    fn projected<'a>(&self, net: &'a Net) -> impl Iterator<Item = (usize, u64)> + 'a {
        let flat = self.flat;
        let wires = net.segments().iter().flat_map(move |s| {
            let plane = match s.orientation {
                Orientation::Horizontal => 0,
                Orientation::Vertical => 1,
            };
            s.cells()
                .map(move |(x, y)| (plane, linear_unchecked(x, y, 0, &flat)))
        });
        let pins = net
            .pins()
            .iter()
            .map(move |p| (2, linear_unchecked(p.x, p.y, 0, &flat)));
        wires.chain(pins)
    }
}

impl BatchFootprint for LayerAgnosticBatch {
    fn collides(&self, net: &Net) -> bool {
        self.cells.collides(net)
            || self
                .projected(net)
                .any(|(plane, i)| self.planes[plane].get(i))
    }

    fn add(&mut self, net: &Net) {
        self.cells.mark_net_unchecked(net);
        let cells: Vec<(usize, u64)> = self.projected(net).collect();
        for (plane, i) in cells {
            self.planes[plane].set(i);
        }
    }
}

struct BoundingBoxBatch {
    union: Option<Rect>,
    boxes: Vec<Rect>,
}

impl BatchFootprint for BoundingBoxBatch {
    fn collides(&self, net: &Net) -> bool {
        let r = net.bbox();
        match self.union {
            Some(u) if u.intersects(&r) => self.boxes.iter().any(|b| b.intersects(&r)),
            _ => false,
        }
    }

    fn add(&mut self, net: &Net) {
        let r = net.bbox();
        self.union = Some(self.union.map_or(r, |u| u.union(&r)));
        self.boxes.push(r);
    }
}

fn first_fit<F: BatchFootprint>(
    netlist: &Netlist,
    mut open: impl FnMut(usize) -> F,
) -> Vec<Vec<NetId>> {
    let mut footprints: Vec<F> = Vec::new();
    let mut batches: Vec<Vec<NetId>> = Vec::new();
    for net in netlist.nets() {
        match footprints.iter().position(|f| !f.collides(net)) {
            Some(b) => {
                footprints[b].add(net);
                batches[b].push(net.id());
            }
            None => {
                let mut f = open(footprints.len() + 1);
                f.add(net);
                footprints.push(f);
                batches.push(vec![net.id()]);
            }
        }
    }
    batches
}

/// First-fit under `strategy`. `threshold` picks dense or sparse maps as the
/// batch count grows.
pub fn greedy_first_fit(netlist: &Netlist, strategy: Strategy, threshold: u64) -> BatchingResult {
    let grid = *netlist.grid();
    let batches = match strategy {
        Strategy::LayerAware => first_fit(netlist, |n| {
            LayerAwareBatch(OccupancyMap::new(
                grid,
                select_representation(n, &grid, threshold),
            ))
        }),
        Strategy::LayerAgnostic => first_fit(netlist, |n| {
            // one 3D map plus three single-layer planes per batch
            let cells = n as u64 * (grid.cells() + 3 * grid.plane());
            let rep = if cells <= threshold {
                Representation::Dense
            } else {
                Representation::Sparse
            };
            LayerAgnosticBatch::new(grid, rep)
        }),
        Strategy::BoundingBox => first_fit(netlist, |_| BoundingBoxBatch {
            union: None,
            boxes: Vec::new(),
        }),
    };
    BatchingResult {
        batches,
        stats: Default::default(),
    }
}

/// First-fit under every strategy in [`Strategy::ALL`] order. Each strategy
/// adopts the previous one's batches when those are fewer; they remain valid
/// because its conflicts are a subset of the previous strategy's. Counts are
/// therefore ordered layer-aware ≤ layer-agnostic ≤ bounding-box.
pub fn nested_first_fit(netlist: &Netlist, threshold: u64) -> Vec<(Strategy, BatchingResult)> {
    let mut out: Vec<(Strategy, BatchingResult)> = Vec::with_capacity(3);
    for strategy in Strategy::ALL {
        let own = greedy_first_fit(netlist, strategy, threshold);
        let best = match out.last() {
            Some((_, looser)) if looser.batch_count() < own.batch_count() => looser.clone(),
            _ => own,
        };
        out.push((strategy, best));
    }
    out
}

/// Reference first-fit comparing each net with every member of a batch.
pub fn greedy_first_fit_pairwise(netlist: &Netlist, strategy: Strategy) -> Vec<Vec<NetId>> {
    let mut batches: Vec<Vec<NetId>> = Vec::new();
    for net in netlist.nets() {
        let fits = |b: &Vec<NetId>| b.iter().all(|&o| !strategy.conflicts(netlist.net(o), net));
        match batches.iter().position(fits) {
            Some(b) => batches[b].push(net.id()),
            None => batches.push(vec![net.id()]),
        }
    }
    batches
}
