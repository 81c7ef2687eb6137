//! Layer-aware evaluation of an initial batch assignment.
//!
//! Each batch is checked against its own occupancy map: nets are visited in
//! ascending id, a net colliding with cells already claimed in that batch is
//! sent to the reroute list, and every other net claims its cells. Batches
//! run on the current rayon pool with one map per worker; results are merged
//! in batch order, so output does not depend on scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netlist::{Net, NetId, Netlist};
use crate::occupancy::{OccupancyMap, Representation};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationResult {
    /// Conflict-free survivors, indexed like the input batches.
    pub accepted: Vec<Vec<NetId>>,
    pub nets2reroute: Vec<NetId>,
}

impl EvaluationResult {
    pub fn accepted_count(&self) -> usize {
        self.accepted.iter().map(Vec::len).sum()
    }
}

/// True iff any pin or segment cell of `net` is already marked.
pub fn conflict_detected(map: &OccupancyMap, net: &Net) -> bool {
    map.collides(net)
}

/// Greedily admits `ids` (in the given order) into `map`. Returns the
/// admitted and the rejected ids.
pub(crate) fn admit(
    map: &mut OccupancyMap,
    netlist: &Netlist,
    ids: impl IntoIterator<Item = NetId>,
) -> (Vec<NetId>, Vec<NetId>) {
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for id in ids {
        let net = netlist.net(id);
        if conflict_detected(map, net) {
            rejected.push(id);
        } else {
            map.mark_net_unchecked(net);
            accepted.push(id);
        }
    }
    (accepted, rejected)
}

/// Checks that every id exists and appears at most once across `batches`.
pub(crate) fn check_ids(batches: &[Vec<NetId>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for (b, batch) in batches.iter().enumerate() {
        for &id in batch {
            let slot = seen.get_mut(id as usize).ok_or_else(|| {
                Error::Validation(format!("batch {b} references unknown net {id}"))
            })?;
            if std::mem::replace(slot, true) {
                return Err(Error::Validation(format!(
                    "net {id} appears in more than one batch slot"
                )));
            }
        }
    }
    Ok(())
}

pub fn evaluate_batches(
    batches: &[Vec<NetId>],
    netlist: &Netlist,
    representation: Representation,
) -> Result<EvaluationResult> {
    check_ids(batches, netlist.len())?;
    let grid = *netlist.grid();
    let per_batch: Vec<(Vec<NetId>, Vec<NetId>)> = batches
        .par_iter()
        .with_max_len(1)
        .map_init(
            || OccupancyMap::new(grid, representation),
            |map, batch| {
                map.clear();
                let mut ids = batch.clone();
                ids.sort_unstable();
                admit(map, netlist, ids)
            },
        )
        .collect();

    let mut result = EvaluationResult {
        accepted: Vec::with_capacity(per_batch.len()),
        nets2reroute: Vec::new(),
    };
    for (accepted, rejected) in per_batch {
        result.accepted.push(accepted);
        result.nets2reroute.extend(rejected);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{generate_synthetic, GridDims, Pin, Segment};
    use crate::overlap::conflict_layer_aware;

    fn grid() -> GridDims {
        GridDims::new(10, 10, 2).unwrap()
    }

    #[test]
    fn disjoint_nets_all_accepted() {
        let nl = Netlist::from_pins(
            grid(),
            vec![
                vec![Pin::new(0, 0, 0), Pin::new(3, 0, 0)],
                vec![Pin::new(0, 5, 0), Pin::new(3, 5, 0)],
            ],
        )
        .unwrap();
        for rep in [Representation::Dense, Representation::Sparse] {
            let r = evaluate_batches(&[vec![0, 1]], &nl, rep).unwrap();
            assert_eq!(r.accepted, vec![vec![0, 1]]);
            assert!(r.nets2reroute.is_empty());
        }
    }

    #[test]
    fn identical_nets_second_rerouted() {
        let nl = Netlist::from_pins(
            grid(),
            vec![vec![Pin::new(4, 4, 1)], vec![Pin::new(4, 4, 1)]],
        )
        .unwrap();
        let r = evaluate_batches(&[vec![1, 0]], &nl, Representation::Dense).unwrap();
        assert_eq!(r.accepted, vec![vec![0]]);
        assert_eq!(r.nets2reroute, vec![1]);
    }

    #[test]
    fn unknown_or_duplicate_ids_rejected() {
        let nl = Netlist::from_pins(grid(), vec![vec![Pin::new(4, 4, 1)]]).unwrap();
        assert!(matches!(
            evaluate_batches(&[vec![0, 3]], &nl, Representation::Dense),
            Err(Error::Validation(_))
        ));
        assert!(evaluate_batches(&[vec![0], vec![0]], &nl, Representation::Dense).is_err());
    }

    #[test]
    fn conflict_detected_examples() {
        let g = grid();
        let a = Net::new(
            0,
            vec![Pin::new(1, 1, 0), Pin::new(4, 1, 0)],
            vec![Segment::horizontal(0, 1, 1, 4)],
        )
        .unwrap();
        let b = Net::new(
            1,
            vec![Pin::new(4, 3, 0), Pin::new(7, 3, 0)],
            vec![
                Segment::horizontal(0, 3, 4, 7),
                Segment::horizontal(0, 1, 4, 6),
            ],
        )
        .unwrap();
        let lifted = Net::new(
            2,
            vec![Pin::new(1, 1, 1), Pin::new(4, 1, 1)],
            vec![Segment::horizontal(1, 1, 1, 4)],
        )
        .unwrap();
        let mut map = OccupancyMap::new(g, Representation::Dense);
        assert!(!conflict_detected(&map, &a));
        map.mark_net(&a).unwrap();
        assert!(conflict_detected(&map, &b), "one shared H cell at (4, 1)");
        assert!(!conflict_detected(&map, &lifted));
    }

    #[test]
    fn accepted_batches_are_sound_and_maximal() {
        let g = GridDims::new(60, 60, 4).unwrap();
        let nl = generate_synthetic(g, 2_000, 2..=6, 21).unwrap();
        let batches = crate::initial::fallback_assign(&nl, 8, 3).group(8);
        let r = evaluate_batches(&batches, &nl, Representation::Sparse).unwrap();
        assert_eq!(r.accepted_count() + r.nets2reroute.len(), nl.len());
        assert!(!r.nets2reroute.is_empty());
        for batch in &r.accepted {
            for (i, &a) in batch.iter().enumerate() {
                for &b in &batch[i + 1..] {
                    assert!(!conflict_layer_aware(nl.net(a), nl.net(b)), "{a} vs {b}");
                }
            }
        }
        // every rerouted net collides with an earlier accepted net of its batch
        for (bi, batch) in batches.iter().enumerate() {
            for &id in batch {
                if r.nets2reroute.contains(&id) {
                    assert!(r.accepted[bi]
                        .iter()
                        .any(|&a| a < id && conflict_layer_aware(nl.net(a), nl.net(id))));
                }
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let g = GridDims::new(80, 80, 4).unwrap();
        let nl = generate_synthetic(g, 3_000, 2..=6, 2).unwrap();
        let batches = crate::initial::fallback_assign(&nl, 12, 1).group(12);
        let run = |w| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .unwrap()
                .install(|| evaluate_batches(&batches, &nl, Representation::Dense).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }
}
