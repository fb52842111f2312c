#![allow(dead_code)]

use fermiweak_core::fock::{build_basis, build_mode_table, FockBasis, GridNode, GridSpec, ModeTable, SpeciesGrid};

/// Grid with the given radial nodes per species, all along one axis, one spin
/// value per species and quadrature weight `w`.
pub fn radial_table(radii: [&[f64]; 4], w: f64) -> ModeTable {
    let species = radii
        .iter()
        .enumerate()
        .map(|(i, rs)| SpeciesGrid {
            nodes: rs.iter().map(|&r| GridNode { momentum: [0.0, 0.0, r], weight: w }).collect(),
            spins: vec![if i == 1 || i == 2 { -1.0 } else { 0.5 }],
        })
        .collect();
    build_mode_table(&GridSpec { species }).unwrap()
}

/// One mode per sector.
pub fn eight_modes() -> ModeTable {
    radial_table([&[0.5], &[0.3], &[0.4], &[0.6]], 0.5)
}

/// Two modes per sector.
pub fn sixteen_modes() -> ModeTable {
    radial_table([&[0.4, 0.8], &[0.2, 0.5], &[0.3, 0.6], &[0.5, 0.9]], 0.3)
}

pub fn basis(table: ModeTable, n_max: usize) -> FockBasis {
    build_basis(table, n_max).unwrap()
}
