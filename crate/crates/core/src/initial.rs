//! Initial batch assignment.
//!
//! Nets are turned into fixed-width coordinate features, pushed through a
//! feed-forward generator in bounded chunks, and assigned to the most likely
//! of `B` batches. [`fallback_assign`] provides a model-free assignment.
//!
//! # Model file layout
//!
//! All integers and floats little-endian.
//!
//! ```text
//! magic        6 bytes  "LBGEN1"
//! feature_dim  u32      (must be 16)
//! n_batches    u32
//! n_layers     u32
//! per layer:
//!   rows       u32      output width
//!   cols       u32      input width
//!   tag_len    u32
//!   tag        tag_len bytes UTF-8, "linear" or "leaky_relu:<slope>"
//!   residual   u8       0|1, requires rows == cols
//!   layer_norm u8       0|1
//!   weights    rows·cols f32, row-major
//!   bias       rows f32
//! crc32        u32      IEEE CRC-32 of every preceding byte
//! ```
//!
//! A layer computes `z = W·h + b`, then non-affine layer normalization
//! (ε = 1e-5) if flagged, then the activation, then `h + z` if residual. The
//! last layer's output goes through a softmax.

use std::io::{Read, Write};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netlist::{GridDims, Net, NetId, Netlist};

pub const FEATURE_DIM: usize = 16;
pub const MAX_FEATURE_PINS: usize = FEATURE_DIM / 2;
pub const MODEL_MAGIC: &[u8; 6] = b"LBGEN1";
pub const DEFAULT_BATCHES: usize = 30;
const LAYER_NORM_EPS: f64 = 1e-5;

/// `min(10⁵, max(10⁴, ⌊n/10⌋))`.
pub fn chunk_size(n_nets: usize) -> usize {
    (n_nets / 10).clamp(10_000, 100_000)
}

/// First eight pins as `(x/W, y/H)` pairs; shorter pin lists repeat
/// cyclically to fill all sixteen slots.
pub fn extract_features(net: &Net, grid: &GridDims) -> [f32; FEATURE_DIM] {
    let pins = &net.pins()[..net.pins().len().min(MAX_FEATURE_PINS)];
    let mut row = [0f32; FEATURE_DIM];
    for (slot, pin) in row.chunks_exact_mut(2).zip(pins.iter().cycle()) {
        slot[0] = pin.x as f32 / grid.width as f32;
        slot[1] = pin.y as f32 / grid.height as f32;
    }
    row
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<[f32; FEATURE_DIM]>,
}

impl FeatureMatrix {
    pub fn from_nets(nets: &[Net], grid: &GridDims) -> Self {
        Self {
            rows: nets.par_iter().map(|n| extract_features(n, grid)).collect(),
        }
    }

    pub fn from_rows(rows: Vec<[f32; FEATURE_DIM]>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[[f32; FEATURE_DIM]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Linear,
    LeakyRelu(f32),
}

impl Activation {
    pub fn tag(&self) -> String {
        match self {
            Activation::Linear => "linear".to_string(),
            Activation::LeakyRelu(slope) => format!("leaky_relu:{slope}"),
        }
    }

    pub fn parse_tag(tag: &str) -> Result<Self> {
        if tag == "linear" {
            return Ok(Activation::Linear);
        }
        if let Some(slope) = tag.strip_prefix("leaky_relu:") {
            return slope
                .parse::<f32>()
                .ok()
                .filter(|s| s.is_finite())
                .map(Activation::LeakyRelu)
                .ok_or_else(|| Error::ModelLoad(format!("bad leaky_relu slope in `{tag}`")));
        }
        Err(Error::ModelLoad(format!("unknown activation tag `{tag}`")))
    }

    #[inline]
    fn apply(&self, v: f64) -> f64 {
        match *self {
            Activation::Linear => v,
            Activation::LeakyRelu(slope) if v < 0.0 => v * slope as f64,
            Activation::LeakyRelu(_) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
    pub activation: Activation,
    pub residual: bool,
    pub layer_norm: bool,
}

impl DenseLayer {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.cols)
                .zip(&self.bias)
                .map(|(w, &b)| {
                    w.iter()
                        .zip(input)
                        .fold(b as f64, |acc, (&wi, &xi)| acc + wi as f64 * xi)
                }),
        );
        if self.layer_norm {
            let n = out.len() as f64;
            let mean = out.iter().sum::<f64>() / n;
            let var = out.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            out.iter_mut().for_each(|v| *v = (*v - mean) * inv);
        }
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.activation.apply(*v);
            if self.residual {
                *v += input[i];
            }
        }
    }
}

/// Feed-forward generator mapping a feature row to a distribution over
/// `n_batches` batches.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    feature_dim: usize,
    n_batches: usize,
    layers: Vec<DenseLayer>,
}

impl GeneratorModel {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::ModelLoad("model has no layers".into()))?;
        let feature_dim = first.cols;
        let n_batches = layers.last().map(|l| l.rows).unwrap_or(0);
        let model = Self {
            feature_dim,
            n_batches,
            layers,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.feature_dim != FEATURE_DIM {
            return Err(Error::ModelLoad(format!(
                "feature_dim {} != {FEATURE_DIM}",
                self.feature_dim
            )));
        }
        if self.n_batches == 0 {
            return Err(Error::ModelLoad("model outputs zero batches".into()));
        }
        let mut width = self.feature_dim;
        for (i, l) in self.layers.iter().enumerate() {
            if l.cols != width {
                return Err(Error::ModelLoad(format!(
                    "layer {i} expects input width {} but receives {width}",
                    l.cols
                )));
            }
            if l.rows == 0 || l.weights.len() != l.rows * l.cols || l.bias.len() != l.rows {
                return Err(Error::ModelLoad(format!(
                    "layer {i} has inconsistent shapes"
                )));
            }
            if l.residual && l.rows != l.cols {
                return Err(Error::ModelLoad(format!(
                    "layer {i} is residual but not square ({}x{})",
                    l.rows, l.cols
                )));
            }
            width = l.rows;
        }
        if width != self.n_batches {
            return Err(Error::ModelLoad(format!(
                "final width {width} != n_batches {}",
                self.n_batches
            )));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn n_batches(&self) -> usize {
        self.n_batches
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Probability vector for one feature row.
    pub fn forward(&self, features: &[f32]) -> Vec<f64> {
        let mut h: Vec<f64> = features.iter().map(|&v| v as f64).collect();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward(&h, &mut next);
            std::mem::swap(&mut h, &mut next);
        }
        softmax_in_place(&mut h);
        h
    }

    /// Row-wise probabilities; rows are independent, so results do not depend
    /// on how rows are grouped.
    pub fn infer(&self, features: &FeatureMatrix) -> Vec<Vec<f64>> {
        features.rows.par_iter().map(|r| self.forward(r)).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MODEL_MAGIC);
        for v in [self.feature_dim, self.n_batches, self.layers.len()] {
            buf.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for l in &self.layers {
            buf.extend_from_slice(&(l.rows as u32).to_le_bytes());
            buf.extend_from_slice(&(l.cols as u32).to_le_bytes());
            let tag = l.activation.tag();
            buf.extend_from_slice(&(tag.len() as u32).to_le_bytes());
            buf.extend_from_slice(tag.as_bytes());
            buf.push(l.residual as u8);
            buf.push(l.layer_norm as u8);
            for v in l.weights.iter().chain(&l.bias) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MODEL_MAGIC.len() + 4 {
            return Err(Error::ModelLoad("file too short".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4-byte tail"));
        if &body[..MODEL_MAGIC.len()] != MODEL_MAGIC {
            return Err(Error::ModelLoad("bad magic".into()));
        }
        if crc32fast::hash(body) != stored {
            return Err(Error::ModelLoad("checksum mismatch".into()));
        }
        let mut cur = Cursor {
            buf: body,
            pos: MODEL_MAGIC.len(),
        };
        let feature_dim = cur.u32()? as usize;
        let n_batches = cur.u32()? as usize;
        let n_layers = cur.u32()? as usize;
        let mut layers = Vec::with_capacity(n_layers.min(64));
        for _ in 0..n_layers {
            let rows = cur.u32()? as usize;
            let cols = cur.u32()? as usize;
            let tag_len = cur.u32()? as usize;
            let tag = std::str::from_utf8(cur.take(tag_len)?)
                .map_err(|_| Error::ModelLoad("activation tag is not UTF-8".into()))?;
            let activation = Activation::parse_tag(tag)?;
            let residual = cur.flag()?;
            let layer_norm = cur.flag()?;
            let n_weights = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::ModelLoad("layer shape overflows".into()))?;
            let weights = cur.f32s(n_weights)?;
            let bias = cur.f32s(rows)?;
            layers.push(DenseLayer {
                rows,
                cols,
                weights,
                bias,
                activation,
                residual,
                layer_norm,
            });
        }
        if cur.pos != body.len() {
            return Err(Error::ModelLoad(format!(
                "{} trailing bytes before checksum",
                body.len() - cur.pos
            )));
        }
        let model = Self {
            feature_dim,
            n_batches,
            layers,
        };
        if model.layers.is_empty() {
            return Err(Error::ModelLoad("model has no layers".into()));
        }
        model.validate()?;
        Ok(model)
    }

    /// Seeded random weights: a residual LeakyReLU stack of `hidden` units
    /// with `depth` hidden layers. Used for fixtures and benchmarks.
    pub fn random(n_batches: usize, hidden: usize, depth: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layer = |rows: usize, cols: usize, act, residual, layer_norm| {
            let scale = (2.0 / cols as f32).sqrt();
            DenseLayer {
                rows,
                cols,
                weights: (0..rows * cols)
                    .map(|_| rng.gen_range(-scale..scale))
                    .collect(),
                bias: (0..rows).map(|_| rng.gen_range(-0.1..0.1)).collect(),
                activation: act,
                residual,
                layer_norm,
            }
        };
        let act = Activation::LeakyRelu(0.2);
        let mut layers = vec![layer(hidden, FEATURE_DIM, act, false, true)];
        for _ in 0..depth.saturating_sub(1) {
            layers.push(layer(hidden, hidden, act, true, true));
        }
        layers.push(layer(n_batches, hidden, Activation::Linear, false, false));
        Self::new(layers)
    }
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelLoad("unexpected end of file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn flag(&mut self) -> Result<bool> {
        match self.take(1)?[0] {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::ModelLoad(format!("flag byte {b} is not 0 or 1"))),
        }
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(
            n.checked_mul(4)
                .ok_or_else(|| Error::ModelLoad("size overflow".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}

/// Per-net batch index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentVector(pub Vec<u32>);

impl AssignmentVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Net ids per batch, ascending within each batch.
    pub fn group(&self, n_batches: usize) -> Vec<Vec<NetId>> {
        let mut counts = vec![0usize; n_batches];
        for &b in &self.0 {
            counts[b as usize] += 1;
        }
        let mut batches: Vec<Vec<NetId>> = counts.into_iter().map(Vec::with_capacity).collect();
        for (net, &b) in self.0.iter().enumerate() {
            batches[b as usize].push(net as NetId);
        }
        batches
    }
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

pub fn assign_batches(netlist: &Netlist, model: &GeneratorModel) -> AssignmentVector {
    assign_batches_chunked(netlist, model, chunk_size(netlist.len().max(1)))
}

/// Runs inference one chunk at a time; only one chunk's features and
/// probabilities are alive at once.
pub fn assign_batches_chunked(
    netlist: &Netlist,
    model: &GeneratorModel,
    chunk: usize,
) -> AssignmentVector {
    let chunk = chunk.max(1);
    let nets = netlist.nets();
    let grid = netlist.grid();
    let mut out = Vec::with_capacity(nets.len());
    let mut start = 0;
    while start < nets.len() {
        let range: Range<usize> = start..(start + chunk).min(nets.len());
        let features = FeatureMatrix::from_nets(&nets[range.clone()], grid);
        let probs = model.infer(&features);
        out.extend(probs.iter().map(|p| argmax(p) as u32));
        start = range.end;
    }
    AssignmentVector(out)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Model-free assignment: the grid is partitioned into G-cells and each
/// net's center cell is hashed, with the seed, into one of `n_batches`
/// buckets.
pub fn fallback_assign(netlist: &Netlist, n_batches: usize, seed: u64) -> AssignmentVector {
    let b = n_batches.max(1) as u64;
    let grid = netlist.grid();
    let key = splitmix64(seed);
    AssignmentVector(
        netlist
            .nets()
            .iter()
            .map(|net| {
                let (cx, cy) = net.center();
                let cell = cx.floor() as u64 * grid.height as u64 + cy.floor() as u64;
                (splitmix64(key ^ splitmix64(cell)) % b) as u32
            })
            .collect(),
    )
}
