//! Multi-species fermionic Fock space: modes, truncated basis, ladder operators.

pub mod basis;
pub mod mode;
pub mod ops;

pub use basis::{build_basis, FockBasis, OccupationState, DEFAULT_BASIS_CAP};
pub use mode::{
    build_mode_table, build_mode_table_with, Charge, Grading, GridNode, GridSpec, Mode, ModeSpec, ModeTable,
    Sector, Species, SpeciesGrid, Spin, MAX_MODES,
};
pub use ops::{
    annihilator, apply_ladder, apply_word, assemble_columns, creator, diagonal_operator, number_operator,
    sector_number_operator, smeared_annihilator, smeared_creator, word_operator, Ladder,
};
