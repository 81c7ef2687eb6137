//! Netlist domain model: grid, pins, layer-assigned segments, and nets.
//!
//! Also holds the line-oriented text format, the rectilinear spanning-tree
//! construction that gives every net its routing footprint, and a seeded
//! synthetic instance generator.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NetId = u32;

/// Global-routing grid extent in G-cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    pub width: u32,
    pub height: u32,
    pub layers: u32,
}

impl GridDims {
    pub fn new(width: u32, height: u32, layers: u32) -> Result<Self> {
        if width == 0 || height == 0 || layers == 0 {
            return Err(Error::Validation(format!(
                "grid dimensions must be positive, got {width}x{height}x{layers}"
            )));
        }
        let cells = (width as u64)
            .checked_mul(height as u64)
            .and_then(|c| c.checked_mul(layers as u64))
            .filter(|&c| usize::try_from(c).is_ok());
        if cells.is_none() {
            return Err(Error::Validation(format!(
                "grid {width}x{height}x{layers} exceeds the addressable index range"
            )));
        }
        Ok(Self {
            width,
            height,
            layers,
        })
    }

    /// Cells in one layer.
    #[inline]
    pub fn plane(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    #[inline]
    pub fn cells(&self) -> u64 {
        self.plane() * self.layers as u64
    }

    #[inline]
    pub fn contains(&self, x: u32, y: u32, layer: u32) -> bool {
        x < self.width && y < self.height && layer < self.layers
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.layers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pin {
    pub x: u32,
    pub y: u32,
    pub layer: u32,
}

impl Pin {
    pub const fn new(x: u32, y: u32, layer: u32) -> Self {
        Self { x, y, layer }
    }

    fn l1(&self, other: &Pin) -> u64 {
        (self.x.abs_diff(other.x) + self.y.abs_diff(other.y)) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    /// Even layers prefer horizontal wires, odd layers vertical.
    pub fn preferred(layer: u32) -> Self {
        if layer.is_multiple_of(2) {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        }
    }
}

/// Axis-aligned wire segment on one layer. `fixed` is the invariant
/// coordinate (y for horizontal, x for vertical); `lo..=hi` is the span along
/// the varying axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub orientation: Orientation,
    pub layer: u32,
    pub fixed: u32,
    pub lo: u32,
    pub hi: u32,
}

impl Segment {
    pub fn horizontal(layer: u32, y: u32, x1: u32, x2: u32) -> Self {
        Self {
            orientation: Orientation::Horizontal,
            layer,
            fixed: y,
            lo: x1.min(x2),
            hi: x1.max(x2),
        }
    }

    pub fn vertical(layer: u32, x: u32, y1: u32, y2: u32) -> Self {
        Self {
            orientation: Orientation::Vertical,
            layer,
            fixed: x,
            lo: y1.min(y2),
            hi: y1.max(y2),
        }
    }

    /// Wirelength in G-cell edges.
    pub fn len(&self) -> u32 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    /// Closed 2D extent.
    pub fn rect(&self) -> Rect {
        match self.orientation {
            Orientation::Horizontal => Rect {
                x0: self.lo,
                x1: self.hi,
                y0: self.fixed,
                y1: self.fixed,
            },
            Orientation::Vertical => Rect {
                x0: self.fixed,
                x1: self.fixed,
                y0: self.lo,
                y1: self.hi,
            },
        }
    }

    /// Covered (x, y) cells, endpoints included.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (self.lo..=self.hi).map(move |t| match self.orientation {
            Orientation::Horizontal => (t, self.fixed),
            Orientation::Vertical => (self.fixed, t),
        })
    }
}

/// Closed integer rectangle in G-cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: u32,
    pub x1: u32,
    pub y0: u32,
    pub y1: u32,
}

impl Rect {
    pub fn point(x: u32, y: u32) -> Self {
        Self {
            x0: x,
            x1: x,
            y0: y,
            y1: y,
        }
    }

    #[inline]
    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            x1: self.x1.max(other.x1),
            y0: self.y0.min(other.y0),
            y1: self.y1.max(other.y1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    id: NetId,
    pins: Vec<Pin>,
    segments: Vec<Segment>,
    center: (f64, f64),
}

impl Net {
    pub fn new(id: NetId, pins: Vec<Pin>, segments: Vec<Segment>) -> Result<Self> {
        if pins.is_empty() {
            return Err(Error::Validation(format!("net {id} has no pins")));
        }
        let n = pins.len() as f64;
        let cx = pins.iter().map(|p| p.x as f64).sum::<f64>() / n;
        let cy = pins.iter().map(|p| p.y as f64).sum::<f64>() / n;
        Ok(Self {
            id,
            pins,
            segments,
            center: (cx, cy),
        })
    }

    /// Builds a net whose segments come from [`build_rsmt`].
    pub fn routed(id: NetId, pins: Vec<Pin>) -> Result<Self> {
        let segments = build_rsmt(&pins);
        Self::new(id, pins, segments)
    }

    #[inline]
    pub fn id(&self) -> NetId {
        self.id
    }

    #[inline]
    pub fn pins(&self) -> &[Pin] {
        &self.pins
    }

    #[inline]
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Mean pin (x, y).
    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn hpwl(&self) -> u64 {
        let bb = self.pin_bbox();
        (bb.x1 - bb.x0) as u64 + (bb.y1 - bb.y0) as u64
    }

    pub fn wirelength(&self) -> u64 {
        self.segments.iter().map(|s| s.len() as u64).sum()
    }

    fn pin_bbox(&self) -> Rect {
        let first = Rect::point(self.pins[0].x, self.pins[0].y);
        self.pins[1..]
            .iter()
            .fold(first, |r, p| r.union(&Rect::point(p.x, p.y)))
    }

    /// 2D bounding box of pins and segments.
    pub fn bbox(&self) -> Rect {
        self.segments
            .iter()
            .fold(self.pin_bbox(), |r, s| r.union(&s.rect()))
    }

    fn check_bounds(&self, grid: &GridDims) -> Result<()> {
        for p in &self.pins {
            if !grid.contains(p.x, p.y, p.layer) {
                return Err(Error::Validation(format!(
                    "net {}: pin ({}, {}, {}) outside grid {grid}",
                    self.id, p.x, p.y, p.layer
                )));
            }
        }
        for s in &self.segments {
            let r = s.rect();
            if !grid.contains(r.x1, r.y1, s.layer) {
                return Err(Error::Validation(format!(
                    "net {}: segment {:?} outside grid {grid}",
                    self.id, s
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    grid: GridDims,
    nets: Vec<Net>,
}

impl Netlist {
    /// Net ids must equal their position; all geometry must lie in the grid.
    pub fn new(grid: GridDims, nets: Vec<Net>) -> Result<Self> {
        for (i, net) in nets.iter().enumerate() {
            if net.id as usize != i {
                return Err(Error::Validation(format!(
                    "net at position {i} has id {}; ids must be dense and in order",
                    net.id
                )));
            }
            net.check_bounds(&grid)?;
        }
        Ok(Self { grid, nets })
    }

    /// One net per pin list, segments built by [`build_rsmt`].
    pub fn from_pins(grid: GridDims, pin_lists: Vec<Vec<Pin>>) -> Result<Self> {
        let nets = pin_lists
            .into_iter()
            .enumerate()
            .map(|(i, pins)| Net::routed(i as NetId, pins))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, nets)
    }

    #[inline]
    pub fn grid(&self) -> &GridDims {
        &self.grid
    }

    #[inline]
    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    #[inline]
    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        parse_netlist(reader)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        parse_netlist(text.as_bytes())
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = &self.grid;
        writeln!(w, "grid {} {} {}", g.width, g.height, g.layers)?;
        for net in &self.nets {
            write_net_body(&mut w, net, None)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("netlist text is ASCII")
    }
}

/// Writes `net ...` plus its pin and segment lines. `extra` is appended to
/// the header line.
pub(crate) fn write_net_body<W: Write>(
    w: &mut W,
    net: &Net,
    extra: Option<&str>,
) -> std::io::Result<()> {
    match extra {
        Some(e) => writeln!(w, "net {} {} {e}", net.id, net.pins.len())?,
        None => writeln!(w, "net {} {}", net.id, net.pins.len())?,
    }
    for p in &net.pins {
        writeln!(w, "pin {} {} {}", p.x, p.y, p.layer)?;
    }
    for s in &net.segments {
        match s.orientation {
            Orientation::Horizontal => {
                writeln!(w, "hseg {} {} {} {}", s.layer, s.fixed, s.lo, s.hi)?
            }
            Orientation::Vertical => writeln!(w, "vseg {} {} {} {}", s.layer, s.fixed, s.lo, s.hi)?,
        }
    }
    Ok(())
}

struct PendingNet {
    id: NetId,
    declared_pins: usize,
    header_line: usize,
    pins: Vec<Pin>,
    segments: Vec<Segment>,
}

impl PendingNet {
    fn finish(self) -> Result<Net> {
        if self.pins.len() != self.declared_pins {
            return Err(Error::parse(
                self.header_line,
                format!(
                    "net {} declares {} pins but lists {}",
                    self.id,
                    self.declared_pins,
                    self.pins.len()
                ),
            ));
        }
        if self.pins.is_empty() {
            return Err(Error::parse(
                self.header_line,
                format!("net {} has no pins", self.id),
            ));
        }
        if self.segments.is_empty() {
            Net::routed(self.id, self.pins)
        } else {
            Net::new(self.id, self.pins, self.segments)
        }
    }
}

fn parse_fields<const N: usize>(fields: &[&str], line: usize, what: &str) -> Result<[u32; N]> {
    if fields.len() != N {
        return Err(Error::parse(
            line,
            format!("`{what}` expects {N} values, found {}", fields.len()),
        ));
    }
    let mut out = [0u32; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f
            .parse()
            .map_err(|_| Error::parse(line, format!("`{f}` is not a non-negative integer")))?;
    }
    Ok(out)
}

pub fn parse_netlist<R: BufRead>(reader: R) -> Result<Netlist> {
    let mut grid: Option<GridDims> = None;
    let mut nets = Vec::new();
    let mut current: Option<PendingNet> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().expect("non-empty line has a token");
        let fields: Vec<&str> = tokens.collect();

        match keyword {
            "grid" => {
                if grid.is_some() {
                    return Err(Error::parse(lineno, "duplicate `grid` header"));
                }
                let [w, h, l] = parse_fields::<3>(&fields, lineno, "grid")?;
                grid =
                    Some(GridDims::new(w, h, l).map_err(|e| Error::parse(lineno, e.to_string()))?);
            }
            "net" => {
                if grid.is_none() {
                    return Err(Error::parse(lineno, "`net` before `grid` header"));
                }
                let [id, n_pins] = parse_fields::<2>(&fields, lineno, "net")?;
                if let Some(prev) = current.take() {
                    nets.push(prev.finish()?);
                }
                if id as usize != nets.len() {
                    return Err(Error::parse(
                        lineno,
                        format!("net id {id} out of order, expected {}", nets.len()),
                    ));
                }
                current = Some(PendingNet {
                    id,
                    declared_pins: n_pins as usize,
                    header_line: lineno,
                    pins: Vec::new(),
                    segments: Vec::new(),
                });
            }
            "pin" | "hseg" | "vseg" => {
                let net = current
                    .as_mut()
                    .ok_or_else(|| Error::parse(lineno, format!("`{keyword}` outside a net")))?;
                match keyword {
                    "pin" => {
                        let [x, y, l] = parse_fields::<3>(&fields, lineno, "pin")?;
                        net.pins.push(Pin::new(x, y, l));
                    }
                    "hseg" => {
                        let [l, y, x1, x2] = parse_fields::<4>(&fields, lineno, "hseg")?;
                        net.segments.push(Segment::horizontal(l, y, x1, x2));
                    }
                    _ => {
                        let [l, x, y1, y2] = parse_fields::<4>(&fields, lineno, "vseg")?;
                        net.segments.push(Segment::vertical(l, x, y1, y2));
                    }
                }
            }
            other => return Err(Error::parse(lineno, format!("unknown keyword `{other}`"))),
        }
    }
    if let Some(last) = current.take() {
        nets.push(last.finish()?);
    }
    let grid = grid.ok_or_else(|| Error::parse(0, "missing `grid` header"))?;
    Netlist::new(grid, nets)
}

fn leg_layer(orientation: Orientation, a: &Pin, b: &Pin) -> u32 {
    [a.layer, b.layer]
        .into_iter()
        .filter(|&l| Orientation::preferred(l) == orientation)
        .min()
        .unwrap_or(a.layer.min(b.layer))
}

/// Rectilinear spanning tree over the pins' (x, y) projections.
///
/// Prim with L1 distances (ties to the lowest pin index); every tree edge is
/// drawn as an L with the horizontal leg leaving the tree-side pin. Each leg
/// sits on the lowest endpoint layer whose preferred direction matches it,
/// else on the lower endpoint layer.
pub fn build_rsmt(pins: &[Pin]) -> Vec<Segment> {
    let k = pins.len();
    if k < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; k];
    let mut best: Vec<u64> = pins.iter().map(|p| pins[0].l1(p)).collect();
    let mut parent = vec![0usize; k];
    in_tree[0] = true;
    let mut segments = Vec::with_capacity(2 * (k - 1));

    for _ in 1..k {
        let v = (0..k)
            .filter(|&i| !in_tree[i])
            .min_by_key(|&i| (best[i], i))
            .expect("at least one pin outside the tree");
        in_tree[v] = true;
        let (p, q) = (&pins[parent[v]], &pins[v]);
        if p.x != q.x {
            let layer = leg_layer(Orientation::Horizontal, p, q);
            segments.push(Segment::horizontal(layer, p.y, p.x, q.x));
        }
        if p.y != q.y {
            let layer = leg_layer(Orientation::Vertical, p, q);
            segments.push(Segment::vertical(layer, q.x, p.y, q.y));
        }
        for u in 0..k {
            if !in_tree[u] {
                let d = q.l1(&pins[u]);
                if d < best[u] {
                    best[u] = d;
                    parent[u] = v;
                }
            }
        }
    }
    segments
}

/// Parameters for [`SynthConfig::generate`].
///
/// Each net's pins are drawn, distinct, from a window of `span`×`span` cells
/// (clamped to the grid) at a uniformly random anchor.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub grid: GridDims,
    pub n_nets: usize,
    pub pins_per_net: RangeInclusive<usize>,
    pub span: u32,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(
        grid: GridDims,
        n_nets: usize,
        pins_per_net: RangeInclusive<usize>,
        seed: u64,
    ) -> Self {
        Self {
            grid,
            n_nets,
            pins_per_net,
            span: default_span(&grid),
            seed,
        }
    }

    pub fn with_span(mut self, span: u32) -> Self {
        self.span = span;
        self
    }

    pub fn generate(&self) -> Result<Netlist> {
        let grid = self.grid;
        let (min_pins, max_pins) = (*self.pins_per_net.start(), *self.pins_per_net.end());
        if self.n_nets == 0 {
            return Err(Error::Generation("at least one net is required".into()));
        }
        if min_pins == 0 || min_pins > max_pins {
            return Err(Error::Generation(format!(
                "invalid pins-per-net range {min_pins}..={max_pins}"
            )));
        }
        if self.span == 0 {
            return Err(Error::Generation("span must be positive".into()));
        }
        let side = (max_pins as f64).sqrt().ceil() as u32;
        let wx = self.span.max(side).min(grid.width);
        let wy = self.span.max(side).min(grid.height);
        if (wx as u64) * (wy as u64) * (grid.layers as u64) < max_pins as u64 {
            return Err(Error::Generation(format!(
                "grid {grid} cannot hold {max_pins} distinct pins in a {wx}x{wy} window"
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut nets = Vec::with_capacity(self.n_nets);
        for id in 0..self.n_nets {
            let k = rng.gen_range(min_pins..=max_pins);
            let x0 = rng.gen_range(0..=grid.width - wx);
            let y0 = rng.gen_range(0..=grid.height - wy);
            let mut pins: Vec<Pin> = Vec::with_capacity(k);
            while pins.len() < k {
                let p = Pin::new(
                    x0 + rng.gen_range(0..wx),
                    y0 + rng.gen_range(0..wy),
                    rng.gen_range(0..grid.layers),
                );
                if !pins.contains(&p) {
                    pins.push(p);
                }
            }
            nets.push(Net::routed(id as NetId, pins)?);
        }
        Netlist::new(grid, nets)
    }
}

/// Default pin window: a sixteenth of the shorter grid side, at least 4.
pub fn default_span(grid: &GridDims) -> u32 {
    (grid.width.min(grid.height) / 16).max(4)
}

pub fn generate_synthetic(
    grid: GridDims,
    n_nets: usize,
    pins_per_net: RangeInclusive<usize>,
    seed: u64,
) -> Result<Netlist> {
    SynthConfig::new(grid, n_nets, pins_per_net, seed).generate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: u32, h: u32, l: u32) -> GridDims {
        GridDims::new(w, h, l).unwrap()
    }

    #[test]
    fn parse_single_net_center() {
        let nl = Netlist::parse_str("grid 10 10 2\nnet 0 2\npin 1 1 0\npin 5 1 0\n").unwrap();
        assert_eq!(nl.len(), 1);
        assert_eq!(nl.net(0).center(), (3.0, 1.0));
        assert_eq!(nl.net(0).segments().len(), 1);
    }

    #[test]
    fn parse_rejects_out_of_bounds_pin() {
        let err = Netlist::parse_str("grid 10 10 2\nnet 0 1\npin 12 0 0\n").unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("net 0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = Netlist::parse_str("grid 10 10 2\n# c\nnet 0 1\npin 1 x 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");

        let err = Netlist::parse_str("grid 10 10 2\nnet 0 2\npin 1 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");

        let err = Netlist::parse_str("net 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");

        let err = Netlist::parse_str("grid 4 4 1\nwire 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn explicit_segments_skip_rsmt() {
        let text =
            "grid 10 10 2\nnet 0 2 # two pins\npin 1 1 0\npin 4 3 0\nvseg 1 1 1 3\nhseg 0 3 1 4\n";
        let nl = Netlist::parse_str(text).unwrap();
        assert_eq!(
            nl.net(0).segments(),
            &[
                Segment::vertical(1, 1, 1, 3),
                Segment::horizontal(0, 3, 1, 4)
            ]
        );
    }

    #[test]
    fn rsmt_collinear_two_pins() {
        let segs = build_rsmt(&[Pin::new(1, 1, 0), Pin::new(4, 1, 0)]);
        assert_eq!(segs, vec![Segment::horizontal(0, 1, 1, 4)]);
    }

    #[test]
    fn rsmt_l_shape_horizontal_first() {
        let segs = build_rsmt(&[Pin::new(1, 1, 0), Pin::new(4, 3, 0)]);
        // no odd layer among the endpoints, so the vertical leg falls back to layer 0
        assert_eq!(
            segs,
            vec![
                Segment::horizontal(0, 1, 1, 4),
                Segment::vertical(0, 4, 1, 3)
            ]
        );
        assert_eq!(segs.iter().map(|s| s.len()).sum::<u32>(), 5);
    }

    #[test]
    fn rsmt_layer_assignment_prefers_matching_direction() {
        let segs = build_rsmt(&[Pin::new(0, 0, 3), Pin::new(5, 5, 2)]);
        assert_eq!(segs[0].layer, 2);
        assert_eq!(segs[1].layer, 3);
        let segs = build_rsmt(&[Pin::new(0, 0, 5), Pin::new(5, 5, 3)]);
        assert_eq!(segs[0].layer, 3, "no even layer: lower endpoint layer");
        assert_eq!(segs[1].layer, 3);
    }

    #[test]
    fn rsmt_three_collinear() {
        let segs = build_rsmt(&[Pin::new(0, 0, 0), Pin::new(2, 0, 0), Pin::new(5, 0, 0)]);
        assert_eq!(
            segs,
            vec![
                Segment::horizontal(0, 0, 0, 2),
                Segment::horizontal(0, 0, 2, 5)
            ]
        );
    }

    #[test]
    fn rsmt_single_and_stacked_pins() {
        assert!(build_rsmt(&[Pin::new(3, 3, 1)]).is_empty());
        assert!(build_rsmt(&[Pin::new(3, 3, 1), Pin::new(3, 3, 0)]).is_empty());
    }

    #[test]
    fn synth_single_pin_net() {
        let nl = generate_synthetic(grid(10, 10, 2), 1, 1..=1, 7).unwrap();
        assert_eq!(nl.net(0).pins().len(), 1);
        assert!(nl.net(0).segments().is_empty());
    }

    #[test]
    fn synth_is_deterministic_per_seed() {
        let g = grid(100, 100, 6);
        let a = generate_synthetic(g, 1000, 2..=8, 1).unwrap().to_text();
        let b = generate_synthetic(g, 1000, 2..=8, 1).unwrap().to_text();
        let c = generate_synthetic(g, 1000, 2..=8, 2).unwrap().to_text();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn synth_errors() {
        assert!(matches!(
            generate_synthetic(grid(2, 2, 1), 1, 5..=5, 0),
            Err(Error::Generation(_))
        ));
        assert!(matches!(
            generate_synthetic(grid(10, 10, 1), 0, 1..=2, 0),
            Err(Error::Generation(_))
        ));
        assert!(matches!(
            generate_synthetic(grid(10, 10, 1), 3, 3..=2, 0),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn grid_rejects_zero() {
        assert!(GridDims::new(0, 4, 1).is_err());
        assert!(GridDims::new(4, 4, 0).is_err());
    }

    #[test]
    fn netlist_rejects_sparse_ids() {
        let g = grid(4, 4, 1);
        let net = Net::routed(1, vec![Pin::new(0, 0, 0)]).unwrap();
        assert!(Netlist::new(g, vec![net]).is_err());
    }
}
