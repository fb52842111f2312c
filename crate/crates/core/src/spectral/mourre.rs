use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;
use crate::spectral::dense::BlockSpectrum;
use crate::spectral::thresholds::ThresholdSet;

/// Bottom of a commutator compressed to a spectral window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MourreRecord {
    pub interval: (f64, f64),
    /// Distance from the window to the threshold set.
    pub beta: f64,
    /// Smallest eigenvalue of `E_Δ C E_Δ` on the range of `E_Δ`; `+∞` for an empty window.
    pub bottom: f64,
    pub dim_window: usize,
}

impl MourreRecord {
    pub fn is_empty(&self) -> bool {
        self.dim_window == 0
    }
}

/// Checks that `[a, b]` avoids the thresholds and returns its distance to them.
pub fn admissible_beta(interval: (f64, f64), s: &ThresholdSet) -> Result<f64> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::Domain(format!("window needs a < b, got [{a}, {b}]")));
    }
    if let Some(t) = s.collision(a, b) {
        return Err(Error::ThresholdCollision { low: a, high: b, threshold: t });
    }
    s.distance(a, b)
}

pub fn mourre_bottom(
    h: &SparseOperator,
    commutator: &SparseOperator,
    interval: (f64, f64),
    s: &ThresholdSet,
) -> Result<MourreRecord> {
    let beta = admissible_beta(interval, s)?;
    mourre_bottom_in(&BlockSpectrum::new(h)?, commutator, interval, beta)
}

/// Same as [`mourre_bottom`] with a precomputed spectrum of `H` and a known `β`.
pub fn mourre_bottom_in(
    spectrum: &BlockSpectrum,
    commutator: &SparseOperator,
    interval: (f64, f64),
    beta: f64,
) -> Result<MourreRecord> {
    let w = spectrum.window(interval.0, interval.1);
    let bottom = if w.is_empty() {
        f64::INFINITY
    } else {
        let m = w.compress(commutator);
        SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    };
    Ok(MourreRecord { interval, beta, bottom, dim_window: w.len() })
}
