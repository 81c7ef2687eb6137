//! Greedy reallocation of conflicting nets.
//!
//! 1. Each pending net (ascending id) is tentatively placed in the first
//!    existing batch, by index, that has room and whose committed cells it
//!    does not touch.
//! 2. Every batch re-validates its tentative nets against its own occupancy,
//!    exactly as the evaluator does; failures go back to pending.
//! 3. Pending nets are packed into new batches, one batch at a time.
//! 4. Small batches are merged when the merge stays conflict-free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{admit, check_ids};
use crate::netlist::{NetId, Netlist};
use crate::occupancy::{select_representation, OccupancyMap, Representation};

pub const DEFAULT_MAX_BATCH_SIZE: usize = 4096;

/// Net count above which the larger consolidation threshold applies.
pub const LARGE_DESIGN_NETS: usize = 10_000_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReallocStats {
    /// Accepted nets pushed to pending because their batch exceeded capacity.
    pub overflow_trimmed: usize,
    /// Pending nets committed into existing batches.
    pub reinserted: usize,
    /// Tentative placements rejected on re-validation.
    pub revalidation_failures: usize,
    pub new_batches: usize,
    pub merges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchingResult {
    pub batches: Vec<Vec<NetId>>,
    pub stats: ReallocStats,
}

impl BatchingResult {
    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }
}

/// Small-batch size limit: 5 nets up to 10M nets, 10 beyond.
pub fn consolidation_threshold(total_nets: usize) -> usize {
    if total_nets <= LARGE_DESIGN_NETS {
        5
    } else {
        10
    }
}

/// `nets2reroute` and `accepted` together must cover every net exactly once.
/// `threshold` drives the dense/sparse choice for the per-batch maps.
pub fn reallocate(
    nets2reroute: &[NetId],
    accepted: Vec<Vec<NetId>>,
    netlist: &Netlist,
    max_batch_size: usize,
    threshold: u64,
) -> Result<BatchingResult> {
    if max_batch_size == 0 {
        return Err(Error::Config("max_batch_size must be positive".into()));
    }
    let mut all = accepted.clone();
    all.push(nets2reroute.to_vec());
    check_ids(&all, netlist.len())?;
    let covered: usize = all.iter().map(Vec::len).sum();
    if covered != netlist.len() {
        return Err(Error::Validation(format!(
            "reallocation input covers {covered} of {} nets",
            netlist.len()
        )));
    }

    let grid = *netlist.grid();
    let mut stats = ReallocStats::default();
    let mut pending: Vec<NetId> = nets2reroute.to_vec();
    let mut committed = accepted;
    for batch in &mut committed {
        batch.sort_unstable();
        if batch.len() > max_batch_size {
            stats.overflow_trimmed += batch.len() - max_batch_size;
            pending.extend(batch.drain(max_batch_size..));
        }
    }
    pending.sort_unstable();

    let rep = select_representation(committed.len().max(1), &grid, threshold);
    let mut maps: Vec<OccupancyMap> = committed
        .par_iter()
        .map(|batch| {
            let mut map = OccupancyMap::new(grid, rep);
            let (_, rejected) = admit(&mut map, netlist, batch.iter().copied());
            if let Some(id) = rejected.first() {
                return Err(Error::Validation(format!(
                    "accepted batch is not conflict-free (net {id})"
                )));
            }
            Ok(map)
        })
        .collect::<Result<_>>()?;

    let (tentative, unassigned) = first_fit(&pending, &committed, &maps, netlist, max_batch_size);

    let revalidated: Vec<(Vec<NetId>, Vec<NetId>)> = maps
        .par_iter_mut()
        .zip(tentative.into_par_iter())
        .map(|(map, ids)| admit(map, netlist, ids))
        .collect();
    drop(maps);

    let mut pending = unassigned;
    for (batch, (survivors, failures)) in committed.iter_mut().zip(revalidated) {
        stats.reinserted += survivors.len();
        stats.revalidation_failures += failures.len();
        batch.extend(survivors);
        batch.sort_unstable();
        pending.extend(failures);
    }
    pending.sort_unstable();

    let single = select_representation(1, &grid, threshold);
    let fresh = exhaustive_new_batches(&pending, netlist, max_batch_size, single);
    stats.new_batches = fresh.len();
    committed.extend(fresh);
    committed.retain(|b| !b.is_empty());

    let (batches, merges) = consolidate(committed, netlist.len(), netlist, max_batch_size, single);
    stats.merges = merges;
    Ok(BatchingResult { batches, stats })
}

/// Tentative first-fit against committed occupancy only. Conflict status of a
/// (net, batch) pair cannot change during this phase, so each net's first
/// conflict-free batch is found in parallel and capacity is then applied in
/// net order.
fn first_fit(
    pending: &[NetId],
    committed: &[Vec<NetId>],
    maps: &[OccupancyMap],
    netlist: &Netlist,
    max_batch_size: usize,
) -> (Vec<Vec<NetId>>, Vec<NetId>) {
    let n_batches = committed.len();
    let free_from = |id: NetId, start: usize| {
        let net = netlist.net(id);
        (start..n_batches).find(|&b| !maps[b].collides(net))
    };
    let first_free: Vec<Option<usize>> = pending.par_iter().map(|&id| free_from(id, 0)).collect();

    let mut tentative: Vec<Vec<NetId>> = vec![Vec::new(); n_batches];
    let mut unassigned = Vec::new();
    for (&id, first) in pending.iter().zip(first_free) {
        let mut slot = first;
        while let Some(b) = slot {
            if committed[b].len() + tentative[b].len() < max_batch_size {
                break;
            }
            slot = free_from(id, b + 1);
        }
        match slot {
            Some(b) => tentative[b].push(id),
            None => unassigned.push(id),
        }
    }
    (tentative, unassigned)
}

/// Opens one batch at a time and fills it with every remaining pending net
/// (in order) that fits, until nothing is left. Each round places at least
/// the first remaining net, so the loop terminates.
pub fn exhaustive_new_batches(
    pending: &[NetId],
    netlist: &Netlist,
    max_batch_size: usize,
    representation: Representation,
) -> Vec<Vec<NetId>> {
    let max_batch_size = max_batch_size.max(1);
    let mut remaining: Vec<NetId> = pending.to_vec();
    let mut batches = Vec::new();
    let mut map = OccupancyMap::new(*netlist.grid(), representation);
    while !remaining.is_empty() {
        map.clear();
        let mut batch = Vec::new();
        let mut rest = Vec::new();
        for id in remaining {
            let net = netlist.net(id);
            if batch.len() < max_batch_size && !map.collides(net) {
                map.mark_net_unchecked(net);
                batch.push(id);
            } else {
                rest.push(id);
            }
        }
        batches.push(batch);
        remaining = rest;
    }
    batches
}

/// Merges batches of at most [`consolidation_threshold`] nets. Each small
/// batch, in index order, absorbs every later small batch whose nets it does
/// not conflict with and that keeps it within `max_batch_size`. Returns the
/// surviving batches (ids ascending) and the number of merges.
pub fn consolidate(
    batches: Vec<Vec<NetId>>,
    total_nets: usize,
    netlist: &Netlist,
    max_batch_size: usize,
    representation: Representation,
) -> (Vec<Vec<NetId>>, usize) {
    let limit = consolidation_threshold(total_nets);
    let small: Vec<bool> = batches
        .iter()
        .map(|b| !b.is_empty() && b.len() <= limit)
        .collect();
    let mut batches: Vec<Option<Vec<NetId>>> = batches.into_iter().map(Some).collect();
    let mut merges = 0;
    let mut map = OccupancyMap::new(*netlist.grid(), representation);

    for i in 0..batches.len() {
        if !small[i] || batches[i].is_none() {
            continue;
        }
        let mut target = batches[i].take().expect("checked above");
        map.clear();
        for &id in &target {
            map.mark_net_unchecked(netlist.net(id));
        }
        for j in i + 1..batches.len() {
            let Some(candidate) = batches[j].as_ref().filter(|_| small[j]) else {
                continue;
            };
            if target.len() + candidate.len() > max_batch_size {
                continue;
            }
            if candidate.iter().any(|&id| map.collides(netlist.net(id))) {
                continue;
            }
            let candidate = batches[j].take().expect("checked above");
            for &id in &candidate {
                map.mark_net_unchecked(netlist.net(id));
            }
            target.extend(candidate);
            merges += 1;
        }
        batches[i] = Some(target);
    }

    let out = batches
        .into_iter()
        .flatten()
        .filter(|b| !b.is_empty())
        .map(|mut b| {
            b.sort_unstable();
            b
        })
        .collect();
    (out, merges)
}
