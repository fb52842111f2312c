//! Ground states, spectral windows, thresholds and dilation commutators.

pub mod commutators;
pub mod dense;
pub mod lanczos;
pub mod mourre;
pub mod projections;
pub mod thresholds;

pub use commutators::{
    commutator_a_h0, commutator_a_hi, double_commutator_a_a_h0, second_dilation_derivative_h0,
};
pub use dense::{dense_ground_state, spectral_window, BlockSpectrum, SpectralWindow, MAX_DENSE_BLOCK};
pub use lanczos::{ground_state, residual, SolverOptions, SpectralReport};
pub use mourre::{admissible_beta, mourre_bottom, mourre_bottom_in, MourreRecord};
pub use projections::{projection_neutrino_vacuum, projection_p_lambda};
pub use thresholds::{thresholds, ThresholdSet};
