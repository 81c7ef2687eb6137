//! Training data export: per-net records and the conflict edge list.
//!
//! Record file:
//!
//! ```text
//! grid <W> <H> <L>
//! net <id> <n_pins> batch <b> hpwl <h>
//! pin <x> <y> <layer>
//! hseg <layer> <y> <x1> <x2>
//! vseg <layer> <x> <y1> <y2>
//! ```
//!
//! Only batches with more than `min_size` nets are kept. Batch indices and
//! net ids are those of the source result, so records can be joined with the
//! edge list directly.

use std::io::Write;

use crate::netlist::{write_net_body, Net, NetId, Netlist};
use crate::overlap::{build_conflict_graph, ConflictGraph, Strategy};

pub const DEFAULT_MIN_BATCH_SIZE: usize = 160;

/// `(net, batch)` pairs of every retained batch, ordered by batch then id.
pub fn select_training_nets(batches: &[Vec<NetId>], min_size: usize) -> Vec<(NetId, usize)> {
    let mut out = Vec::new();
    for (b, batch) in batches.iter().enumerate() {
        if batch.len() > min_size {
            let mut ids = batch.clone();
            ids.sort_unstable();
            out.extend(ids.into_iter().map(|id| (id, b)));
        }
    }
    out
}

pub fn write_training_records<W: Write>(
    mut w: W,
    netlist: &Netlist,
    selected: &[(NetId, usize)],
) -> std::io::Result<()> {
    let g = netlist.grid();
    writeln!(w, "grid {} {} {}", g.width, g.height, g.layers)?;
    for &(id, b) in selected {
        let net = netlist.net(id);
        write_net_body(&mut w, net, Some(&format!("batch {b} hpwl {}", net.hpwl())))?;
    }
    Ok(())
}

/// Layer-aware conflict graph restricted to the selected nets, keyed by
/// original net id.
pub fn training_conflict_graph(netlist: &Netlist, selected: &[(NetId, usize)]) -> ConflictGraph {
    let ids: Vec<NetId> = selected.iter().map(|&(id, _)| id).collect();
    let nets: Vec<Net> = ids
        .iter()
        .enumerate()
        .map(|(k, &id)| {
            let src = netlist.net(id);
            Net::new(k as NetId, src.pins().to_vec(), src.segments().to_vec())
                .expect("source net is valid")
        })
        .collect();
    let sub = Netlist::new(*netlist.grid(), nets).expect("source nets are in bounds");
    let local = build_conflict_graph(&sub, Strategy::LayerAware);
    ConflictGraph::from_edges(
        netlist.len(),
        local
            .edges()
            .iter()
            .map(|&(a, b)| (ids[a as usize], ids[b as usize])),
    )
}
