//! Boolean occupancy over the linearized 3D routing grid.
//!
//! Cell `(x, y, layer)` maps to `layer·W·H + x·H + y`. A map is either a
//! packed dense bit array covering every cell or a hash set of marked
//! indices; both answer membership queries identically.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{GridDims, Net, Orientation};

/// Default dense→sparse switch point, in cells summed over all parallel maps.
pub const DEFAULT_DENSE_THRESHOLD: u64 = 1 << 28;

/// Initial capacity of a sparse map.
pub const SPARSE_PREALLOC: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dense,
    Sparse,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::Dense => "dense",
            Representation::Sparse => "sparse",
        })
    }
}

pub fn linearize(x: u32, y: u32, layer: u32, grid: &GridDims) -> Result<u64> {
    if !grid.contains(x, y, layer) {
        return Err(Error::Index {
            index: linear_unchecked(x, y, layer, grid),
            extent: grid.cells(),
        });
    }
    Ok(linear_unchecked(x, y, layer, grid))
}

#[inline]
pub(crate) fn linear_unchecked(x: u32, y: u32, layer: u32, grid: &GridDims) -> u64 {
    layer as u64 * grid.plane() + x as u64 * grid.height as u64 + y as u64
}

/// Dense when `n_parallel_maps · cells ≤ threshold`.
pub fn select_representation(
    n_parallel_maps: usize,
    grid: &GridDims,
    threshold: u64,
) -> Representation {
    match (n_parallel_maps as u64).checked_mul(grid.cells()) {
        Some(total) if total <= threshold => Representation::Dense,
        _ => Representation::Sparse,
    }
}

#[derive(Debug, Clone)]
enum Store {
    Dense(Vec<u64>),
    Sparse(FxHashSet<u64>),
}

#[derive(Debug, Clone)]
pub struct OccupancyMap {
    grid: GridDims,
    store: Store,
}

impl OccupancyMap {
    pub fn new(grid: GridDims, representation: Representation) -> Self {
        let store = match representation {
            Representation::Dense => Store::Dense(vec![0; grid.cells().div_ceil(64) as usize]),
            Representation::Sparse => Store::Sparse(FxHashSet::with_capacity_and_hasher(
                SPARSE_PREALLOC,
                Default::default(),
            )),
        };
        Self { grid, store }
    }

    pub fn representation(&self) -> Representation {
        match self.store {
            Store::Dense(_) => Representation::Dense,
            Store::Sparse(_) => Representation::Sparse,
        }
    }

    pub fn grid(&self) -> &GridDims {
        &self.grid
    }

    fn check(&self, index: u64) -> Result<()> {
        let extent = self.grid.cells();
        if index >= extent {
            return Err(Error::Index { index, extent });
        }
        Ok(())
    }

    pub fn mark(&mut self, index: u64) -> Result<()> {
        self.check(index)?;
        self.set(index);
        Ok(())
    }

    pub fn is_marked(&self, index: u64) -> Result<bool> {
        self.check(index)?;
        Ok(self.get(index))
    }

    #[inline]
    pub(crate) fn set(&mut self, index: u64) {
        match &mut self.store {
            Store::Dense(bits) => bits[(index >> 6) as usize] |= 1 << (index & 63),
            Store::Sparse(set) => {
                set.insert(index);
            }
        }
    }

    #[inline]
    pub(crate) fn get(&self, index: u64) -> bool {
        match &self.store {
            Store::Dense(bits) => bits[(index >> 6) as usize] & (1 << (index & 63)) != 0,
            Store::Sparse(set) => set.contains(&index),
        }
    }

    /// Number of marked cells.
    pub fn count(&self) -> usize {
        match &self.store {
            Store::Dense(bits) => bits.iter().map(|w| w.count_ones() as usize).sum(),
            Store::Sparse(set) => set.len(),
        }
    }

    /// Unmarks every cell, keeping the allocation.
    pub fn clear(&mut self) {
        match &mut self.store {
            Store::Dense(bits) => bits.fill(0),
            Store::Sparse(set) => set.clear(),
        }
    }

    /// Marks every pin cell and every cell covered by the net's segments, each
    /// on its own layer. Errors if any cell falls outside the map's grid.
    pub fn mark_net(&mut self, net: &Net) -> Result<()> {
        check_net_cells(net, &self.grid)?;
        self.mark_net_unchecked(net);
        Ok(())
    }

    /// True iff any cell of the net is already marked.
    pub fn collides(&self, net: &Net) -> bool {
        net_cells(net, &self.grid).any(|i| self.get(i))
    }

    /// Caller guarantees the net lies inside this map's grid (true for every
    /// net of a validated [`crate::Netlist`] on the same grid).
    pub(crate) fn mark_net_unchecked(&mut self, net: &Net) {
        let grid = self.grid;
        for i in net_cells(net, &grid) {
            self.set(i);
        }
    }
}

fn check_net_cells(net: &Net, grid: &GridDims) -> Result<()> {
    let extent = grid.cells();
    for p in net.pins() {
        if !grid.contains(p.x, p.y, p.layer) {
            return Err(Error::Index {
                index: linear_unchecked(p.x, p.y, p.layer, grid),
                extent,
            });
        }
    }
    for s in net.segments() {
        let r = s.rect();
        if !grid.contains(r.x1, r.y1, s.layer) {
            return Err(Error::Index {
                index: linear_unchecked(r.x1, r.y1, s.layer, grid),
                extent,
            });
        }
    }
    Ok(())
}

/// Linear indices of every cell the net occupies: pins first, then segment
/// cells. Indices may repeat.
pub(crate) fn net_cells<'a>(net: &'a Net, grid: &'a GridDims) -> impl Iterator<Item = u64> + 'a {
    let h = grid.height as u64;
    let pins = net
        .pins()
        .iter()
        .map(move |p| linear_unchecked(p.x, p.y, p.layer, grid));
    let segs = net.segments().iter().flat_map(move |s| {
        let (start, stride) = match s.orientation {
            Orientation::Horizontal => (linear_unchecked(s.lo, s.fixed, s.layer, grid), h),
            Orientation::Vertical => (linear_unchecked(s.fixed, s.lo, s.layer, grid), 1),
        };
        (0..=(s.hi - s.lo) as u64).map(move |k| start + k * stride)
    });
    pins.chain(segs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Pin, Segment};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(w: u32, h: u32, l: u32) -> GridDims {
        GridDims::new(w, h, l).unwrap()
    }

    #[test]
    fn linearize_examples() {
        assert_eq!(linearize(0, 0, 0, &grid(7, 9, 3)).unwrap(), 0);
        assert_eq!(linearize(3, 4, 2, &grid(10, 20, 3)).unwrap(), 464);
        assert!(matches!(
            linearize(10, 0, 0, &grid(10, 20, 3)),
            Err(Error::Index { .. })
        ));
        assert!(linearize(0, 0, 3, &grid(10, 20, 3)).is_err());
    }

    #[test]
    fn linearize_bijective_small_grid() {
        let g = grid(4, 5, 3);
        let mut seen = vec![false; 60];
        for l in 0..3 {
            for x in 0..4 {
                for y in 0..5 {
                    let i = linearize(x, y, l, &g).unwrap() as usize;
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn representation_rule() {
        let t = DEFAULT_DENSE_THRESHOLD;
        assert_eq!(
            select_representation(8, &grid(100, 100, 6), t),
            Representation::Dense
        );
        assert_eq!(
            select_representation(64, &grid(9245, 12544, 10), t),
            Representation::Sparse
        );
        let g = grid(100, 100, 6);
        assert_eq!(select_representation(8, &g, 480_000), Representation::Dense);
        assert_eq!(
            select_representation(8, &g, 479_999),
            Representation::Sparse
        );
    }

    #[test]
    fn mark_and_query() {
        let g = grid(10, 20, 3);
        for rep in [Representation::Dense, Representation::Sparse] {
            let mut m = OccupancyMap::new(g, rep);
            assert!(!m.is_marked(464).unwrap());
            m.mark(464).unwrap();
            assert!(m.is_marked(464).unwrap());
            assert!(matches!(m.mark(600), Err(Error::Index { .. })));
            assert!(m.is_marked(600).is_err());
            m.clear();
            assert_eq!(m.count(), 0);
        }
    }

    #[test]
    fn dense_sparse_differential() {
        let g = grid(37, 23, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut dense = OccupancyMap::new(g, Representation::Dense);
        let mut sparse = OccupancyMap::new(g, Representation::Sparse);
        for _ in 0..10_000 {
            let i = rng.gen_range(0..g.cells());
            dense.mark(i).unwrap();
            sparse.mark(i).unwrap();
        }
        for _ in 0..100_000 {
            let i = rng.gen_range(0..g.cells());
            assert_eq!(dense.is_marked(i).unwrap(), sparse.is_marked(i).unwrap());
        }
        assert_eq!(dense.count(), sparse.count());
    }

    #[test]
    fn mark_net_counts() {
        let g = grid(10, 10, 2);
        let single = Net::new(0, vec![Pin::new(2, 2, 1)], vec![]).unwrap();
        let mut m = OccupancyMap::new(g, Representation::Dense);
        m.mark_net(&single).unwrap();
        assert_eq!(m.count(), 1);

        let seg = Net::new(
            0,
            vec![Pin::new(1, 1, 0), Pin::new(4, 1, 0)],
            vec![Segment::horizontal(0, 1, 1, 4)],
        )
        .unwrap();
        let mut m = OccupancyMap::new(g, Representation::Sparse);
        m.mark_net(&seg).unwrap();
        assert_eq!(m.count(), 4);
        m.mark_net(&seg).unwrap();
        assert_eq!(m.count(), 4, "idempotent");
    }

    #[test]
    fn mark_net_layers_are_disjoint() {
        let g = grid(10, 10, 2);
        let net = Net::new(
            0,
            vec![Pin::new(1, 1, 1), Pin::new(4, 1, 1)],
            vec![Segment::horizontal(0, 1, 1, 4)],
        )
        .unwrap();
        let mut m = OccupancyMap::new(g, Representation::Sparse);
        m.mark_net(&net).unwrap();
        let marked: Vec<u64> = (0..g.cells())
            .filter(|&i| m.is_marked(i).unwrap())
            .collect();
        let (l0, l1): (Vec<u64>, Vec<u64>) = marked.iter().partition(|&&i| i < g.plane());
        assert_eq!(l0.len(), 4);
        assert_eq!(l1.len(), 2);
        assert_eq!(marked.len(), 6);
    }

    #[test]
    fn mark_net_out_of_grid() {
        let net = Net::new(0, vec![Pin::new(9, 9, 0)], vec![]).unwrap();
        let mut m = OccupancyMap::new(grid(5, 5, 1), Representation::Dense);
        assert!(matches!(m.mark_net(&net), Err(Error::Index { .. })));
    }
}
