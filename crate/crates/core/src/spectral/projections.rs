use crate::error::{Error, Result};
use crate::fock::{diagonal_operator, FockBasis, Species};
use crate::model::{mode_energies, PhysicalParams};
use crate::sparse::SparseOperator;

/// Spectral projection of the massive free energy (species 1 and 4) onto `[0, λ]`.
///
/// For `0 < λ < m₁` this keeps exactly the states without species-1 or
/// species-4 particles.
pub fn projection_p_lambda(basis: &FockBasis, params: &PhysicalParams, lambda: f64) -> Result<SparseOperator> {
    if !(lambda > 0.0 && lambda < params.m1) {
        return Err(Error::Domain(format!("lambda must lie in (0, m1) = (0, {}), got {lambda}", params.m1)));
    }
    let table = basis.table();
    let omega = mode_energies(table, params);
    let massive = table.species_mask(Species::ONE) | table.species_mask(Species::FOUR);
    Ok(diagonal_operator(basis, |bits| {
        let e = crate::model::assemble::occupied_sum(bits & massive, &omega);
        if e <= lambda {
            1.0
        } else {
            0.0
        }
    }))
}

/// Projection onto the neutrino vacuum: no species-2 or species-3 particles.
pub fn projection_neutrino_vacuum(basis: &FockBasis) -> SparseOperator {
    let table = basis.table();
    let neutrinos = table.species_mask(Species::TWO) | table.species_mask(Species::THREE);
    diagonal_operator(basis, |bits| if bits & neutrinos == 0 { 1.0 } else { 0.0 })
}
