//! Creation, annihilation and number operators as sparse matrices.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::basis::FockBasis;
use crate::fock::mode::{ModeTable, Sector, Species};
use crate::sparse::SparseOperator;

/// A single creation or annihilation operator on a global mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Applies one ladder operator to an occupation pattern.
///
/// Returns the new pattern and whether the grading-group string produced a
/// minus sign, or `None` when the result vanishes.
#[inline]
pub fn apply_ladder(table: &ModeTable, op: Ladder, bits: u64) -> Option<(u64, bool)> {
    let (k, want_occupied) = match op {
        Ladder::Create(k) => (k, false),
        Ladder::Annihilate(k) => (k, true),
    };
    let bit = 1u64 << k;
    if (bits & bit != 0) != want_occupied {
        return None;
    }
    let odd = (bits & table.sign_string(k)).count_ones() & 1 == 1;
    Some((bits ^ bit, odd))
}

/// Applies a product of ladder operators, written left to right as in the
/// operator expression, so the rightmost factor acts first.
#[inline]
pub fn apply_word(table: &ModeTable, word: &[Ladder], bits: u64) -> Option<(u64, f64)> {
    let mut b = bits;
    let mut negative = false;
    for &op in word.iter().rev() {
        let (nb, odd) = apply_ladder(table, op, b)?;
        b = nb;
        negative ^= odd;
    }
    Some((b, if negative { -1.0 } else { 1.0 }))
}

/// Builds an operator column by column. `column(bits, out)` pushes
/// `(target_bits, value)` pairs; targets outside the truncation are dropped.
pub fn assemble_columns<F>(basis: &FockBasis, column: F) -> SparseOperator
where
    F: Fn(u64, &mut Vec<(u64, Complex64)>) + Sync,
{
    let columns: Vec<Vec<(usize, Complex64)>> = basis
        .states()
        .par_iter()
        .with_min_len(64)
        .map(|&bits| {
            let mut raw = Vec::new();
            column(bits, &mut raw);
            raw.into_iter()
                .filter_map(|(t, v)| basis.index_of(t).map(|r| (r, v)))
                .collect()
        })
        .collect();
    SparseOperator::from_columns(basis.len(), columns)
}

fn check_mode(basis: &FockBasis, k: usize) {
    assert!(k < basis.n_modes(), "mode index {k} out of range ({} modes)", basis.n_modes());
}

/// Matrix of the annihilator `b_k`.
pub fn annihilator(basis: &FockBasis, k: usize) -> SparseOperator {
    check_mode(basis, k);
    word_operator(basis, &[Ladder::Annihilate(k)], Complex64::new(1.0, 0.0))
}

/// Matrix of the creator `b*_k`, the exact conjugate transpose of [`annihilator`].
pub fn creator(basis: &FockBasis, k: usize) -> SparseOperator {
    annihilator(basis, k).adjoint()
}

/// `coefficient` times the product of ladder operators in `word`.
pub fn word_operator(basis: &FockBasis, word: &[Ladder], coefficient: Complex64) -> SparseOperator {
    let table = basis.table();
    assemble_columns(basis, |bits, out| {
        if let Some((t, s)) = apply_word(table, word, bits) {
            out.push((t, coefficient * s));
        }
    })
}

fn smeared_coefficients(basis: &FockBasis, sector: Sector, phi: &[Complex64]) -> Result<Vec<(usize, Complex64)>> {
    let table = basis.table();
    let range = table.sector_range(sector);
    if phi.len() != range.len() {
        return Err(Error::DimensionMismatch { expected: range.len(), got: phi.len() });
    }
    Ok(range
        .zip(phi)
        .map(|(k, f)| (k, f.conj() * table.mode(k).weight.sqrt()))
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .collect())
}

/// `b(φ) = Σ_k √w_k conj(φ_k) b_k` over the modes of one sector.
///
/// Mode operators are orthonormal, so the pointwise field at a node is
/// `b_k / √w_k` and the quadrature weight enters once per integral.
pub fn smeared_annihilator(basis: &FockBasis, sector: Sector, phi: &[Complex64]) -> Result<SparseOperator> {
    let coeffs = smeared_coefficients(basis, sector, phi)?;
    let table = basis.table();
    Ok(assemble_columns(basis, |bits, out| {
        for &(k, c) in &coeffs {
            if let Some((t, odd)) = apply_ladder(table, Ladder::Annihilate(k), bits) {
                out.push((t, if odd { -c } else { c }));
            }
        }
    }))
}

pub fn smeared_creator(basis: &FockBasis, sector: Sector, phi: &[Complex64]) -> Result<SparseOperator> {
    Ok(smeared_annihilator(basis, sector, phi)?.adjoint())
}

/// Diagonal operator with entry `f(bits)`.
pub fn diagonal_operator(basis: &FockBasis, f: impl Fn(u64) -> f64 + Sync) -> SparseOperator {
    let d: Vec<f64> = basis.states().par_iter().map(|&b| f(b)).collect();
    SparseOperator::from_diagonal(&d)
}

/// `N_j`: number of occupied modes of a species, both charges.
pub fn number_operator(basis: &FockBasis, species: Species) -> SparseOperator {
    let mask = basis.table().species_mask(species);
    diagonal_operator(basis, |b| f64::from((b & mask).count_ones()))
}

pub fn sector_number_operator(basis: &FockBasis, sector: Sector) -> SparseOperator {
    let mask = basis.table().sector_mask(sector);
    diagonal_operator(basis, |b| f64::from((b & mask).count_ones()))
}
