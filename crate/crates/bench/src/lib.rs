//! Shared fixtures for the criterion benches.

use netbatch_core::{generate_synthetic, GridDims, Netlist};

/// Seeded synthetic netlist on a `side × side × layers` grid.
pub fn fixture(side: u32, layers: u32, nets: usize, seed: u64) -> Netlist {
    let grid = GridDims::new(side, side, layers).expect("positive grid");
    generate_synthetic(grid, nets, 2..=8, seed).expect("fixture generation")
}
