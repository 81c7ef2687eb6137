//! End-to-end batching: initial assignment → evaluation → reallocation.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::nested_first_fit;
use crate::error::{Error, Result};
use crate::evaluator::evaluate_batches;
use crate::initial::{
    assign_batches_chunked, chunk_size, fallback_assign, GeneratorModel, DEFAULT_BATCHES,
};
use crate::netlist::{NetId, Netlist};
use crate::occupancy::{select_representation, Representation, DEFAULT_DENSE_THRESHOLD};
use crate::overlap::conflict_layer_aware;
use crate::reallocator::{reallocate, BatchingResult, DEFAULT_MAX_BATCH_SIZE};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Generator for the initial assignment; `None` uses [`fallback_assign`].
    pub model: Option<GeneratorModel>,
    /// Initial batch count when no model is given (a model fixes its own).
    pub n_batches: usize,
    pub max_batch_size: usize,
    /// Dense/sparse switch point in cells across parallel maps.
    pub threshold: u64,
    /// Worker threads; 0 means all available cores.
    pub workers: usize,
    pub seed: u64,
    /// Inference chunk override; defaults to [`chunk_size`].
    pub chunk_size: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            model: None,
            n_batches: DEFAULT_BATCHES,
            max_batch_size: DEFAULT_MAX_BATCH_SIZE,
            threshold: DEFAULT_DENSE_THRESHOLD,
            workers: 0,
            seed: 0,
            chunk_size: None,
        }
    }
}

impl PipelineConfig {
    fn effective_workers(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.workers
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub n_nets: usize,
    pub n_initial_batches: usize,
    /// `generator` or `fallback`.
    pub assignment: String,
    /// Fraction of nets the evaluator accepted from the initial assignment.
    pub conflict_free_fraction: f64,
    pub rerouted: usize,
    pub overflow_trimmed: usize,
    pub reinserted: usize,
    pub revalidation_failures: usize,
    pub new_batches: usize,
    pub merges: usize,
    pub final_batches: usize,
    pub representation: Representation,
    pub workers: usize,
    pub initial_ms: f64,
    pub evaluate_ms: f64,
    pub reallocate_ms: f64,
    pub total_ms: f64,
}

impl PipelineStats {
    /// `key = value` lines in a fixed order.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("n_nets", self.n_nets.to_string());
        kv("n_initial_batches", self.n_initial_batches.to_string());
        kv("assignment", self.assignment.clone());
        kv(
            "conflict_free_fraction",
            format!("{:.6}", self.conflict_free_fraction),
        );
        kv("rerouted", self.rerouted.to_string());
        kv("overflow_trimmed", self.overflow_trimmed.to_string());
        kv("reinserted", self.reinserted.to_string());
        kv(
            "revalidation_failures",
            self.revalidation_failures.to_string(),
        );
        kv("new_batches", self.new_batches.to_string());
        kv("merges", self.merges.to_string());
        kv("final_batches", self.final_batches.to_string());
        kv("representation", self.representation.to_string());
        kv("workers", self.workers.to_string());
        kv("initial_ms", format!("{:.3}", self.initial_ms));
        kv("evaluate_ms", format!("{:.3}", self.evaluate_ms));
        kv("reallocate_ms", format!("{:.3}", self.reallocate_ms));
        kv("total_ms", format!("{:.3}", self.total_ms));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run_pipeline(
    netlist: &Netlist,
    config: &PipelineConfig,
) -> Result<(BatchingResult, PipelineStats)> {
    let n_batches = match &config.model {
        Some(m) => m.n_batches(),
        None => config.n_batches,
    };
    if n_batches == 0 {
        return Err(Error::Config("initial batch count must be positive".into()));
    }
    if config.max_batch_size == 0 {
        return Err(Error::Config("max_batch_size must be positive".into()));
    }
    if config.chunk_size == Some(0) {
        return Err(Error::Config("chunk size must be positive".into()));
    }
    let workers = config.effective_workers();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;

    pool.install(|| {
        let total = Instant::now();
        let grid = netlist.grid();

        let t = Instant::now();
        let assignment = match &config.model {
            Some(model) => {
                let chunk = config
                    .chunk_size
                    .unwrap_or_else(|| chunk_size(netlist.len().max(1)));
                assign_batches_chunked(netlist, model, chunk)
            }
            None => fallback_assign(netlist, n_batches, config.seed),
        };
        let initial = assignment.group(n_batches);
        let initial_ms = millis(t);

        let t = Instant::now();
        let representation = select_representation(n_batches, grid, config.threshold);
        let eval = evaluate_batches(&initial, netlist, representation)?;
        let evaluate_ms = millis(t);
        let accepted = eval.accepted_count();
        let rerouted = eval.nets2reroute.len();

        let t = Instant::now();
        let result = reallocate(
            &eval.nets2reroute,
            eval.accepted,
            netlist,
            config.max_batch_size,
            config.threshold,
        )?;
        let reallocate_ms = millis(t);

        let s = &result.stats;
        let stats = PipelineStats {
            n_nets: netlist.len(),
            n_initial_batches: n_batches,
            assignment: if config.model.is_some() {
                "generator"
            } else {
                "fallback"
            }
            .into(),
            conflict_free_fraction: if netlist.is_empty() {
                1.0
            } else {
                accepted as f64 / netlist.len() as f64
            },
            rerouted,
            overflow_trimmed: s.overflow_trimmed,
            reinserted: s.reinserted,
            revalidation_failures: s.revalidation_failures,
            new_batches: s.new_batches,
            merges: s.merges,
            final_batches: result.batches.len(),
            representation,
            workers,
            initial_ms,
            evaluate_ms,
            reallocate_ms,
            total_ms: millis(total),
        };
        Ok((result, stats))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchConflict {
    pub batch: usize,
    pub a: NetId,
    pub b: NetId,
}

/// Partition violations and conflicting pairs; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub unknown: Vec<(usize, NetId)>,
    pub duplicated: Vec<NetId>,
    pub missing: Vec<NetId>,
    pub conflicts: Vec<BatchConflict>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.unknown.is_empty()
            && self.duplicated.is_empty()
            && self.missing.is_empty()
            && self.conflicts.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        for (batch, id) in &self.unknown {
            writeln!(f, "unknown net {id} in batch {batch}")?;
        }
        for id in &self.duplicated {
            writeln!(f, "net {id} assigned more than once")?;
        }
        for id in &self.missing {
            writeln!(f, "net {id} not assigned")?;
        }
        for c in &self.conflicts {
            writeln!(f, "conflict in batch {}: nets {} and {}", c.batch, c.a, c.b)?;
        }
        Ok(())
    }
}

/// Checks that `batches` partition the netlist and that no two nets of a
/// batch conflict under the layer-aware predicate, comparing every pair.
pub fn validate_result(batches: &[Vec<NetId>], netlist: &Netlist) -> ValidityReport {
    let n = netlist.len();
    let mut report = ValidityReport::default();
    let mut count = vec![0u32; n];
    for (bi, batch) in batches.iter().enumerate() {
        for &id in batch {
            match count.get_mut(id as usize) {
                Some(c) => *c += 1,
                None => report.unknown.push((bi, id)),
            }
        }
    }
    for (id, &c) in count.iter().enumerate() {
        match c {
            0 => report.missing.push(id as NetId),
            1 => {}
            _ => report.duplicated.push(id as NetId),
        }
    }

    report.conflicts = batches
        .par_iter()
        .enumerate()
        .flat_map_iter(|(bi, batch)| {
            let members: Vec<(NetId, crate::netlist::Rect)> = batch
                .iter()
                .filter(|&&id| (id as usize) < n)
                .map(|&id| (id, netlist.net(id).bbox()))
                .collect();
            let mut found = Vec::new();
            for (i, (a, ra)) in members.iter().enumerate() {
                for (b, rb) in &members[i + 1..] {
                    if ra.intersects(rb) && conflict_layer_aware(netlist.net(*a), netlist.net(*b)) {
                        found.push(BatchConflict {
                            batch: bi,
                            a: *a.min(b),
                            b: *a.max(b),
                        });
                    }
                }
            }
            found
        })
        .collect();
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub batches: usize,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serialize")
    }

    pub fn batches_for(&self, method: &str) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.batches)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24} {:>10} {:>12}", "method", "batches", "time_ms")?;
        for r in &self.rows {
            writeln!(f, "{:<24} {:>10} {:>12.3}", r.method, r.batches, r.millis)?;
        }
        Ok(())
    }
}

/// First-fit batch counts under each overlap strategy (see
/// [`crate::baselines::nested_first_fit`]), plus the full pipeline. The layer-agnostic row
/// approximates segment-based batching as used by existing routers. The
/// baseline rows share one timing covering all three.
pub fn compare_strategies(netlist: &Netlist, config: &PipelineConfig) -> Result<Comparison> {
    let mut rows = Vec::new();
    let t = Instant::now();
    let nested = nested_first_fit(netlist, config.threshold);
    let baseline_ms = millis(t);
    for (strategy, r) in nested {
        rows.push(ComparisonRow {
            method: format!("first-fit/{}", strategy.name()),
            batches: r.batch_count(),
            millis: baseline_ms,
        });
    }
    let t = Instant::now();
    let (r, _) = run_pipeline(netlist, config)?;
    rows.push(ComparisonRow {
        method: "pipeline".into(),
        batches: r.batch_count(),
        millis: millis(t),
    });
    Ok(Comparison { rows })
}
