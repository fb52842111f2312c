use serde::Serialize;

use super::{real_diagonal, CheckContext, CheckResult, Tally};
use crate::error::Result;
use crate::fock::FockBasis;
use crate::model::{dilation_kernel, regularity, Hamiltonian, Kernel, PhysicalParams};
use crate::spectral::{
    admissible_beta, commutator_a_h0, commutator_a_hi, double_commutator_a_a_h0, mourre_bottom_in,
    second_dilation_derivative_h0, thresholds, BlockSpectrum, MourreRecord,
};
use crate::Complex64;

/// Slack allowed in the free commutator bound.
pub const FREE_MOURRE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MourrePoint {
    pub g: f64,
    pub record: MourreRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MourreScan {
    /// Free records first, then one block per nonzero coupling, windows in input order.
    pub points: Vec<MourrePoint>,
    /// Smallest `c ≥ 0` with `bottom ≥ β/2 − c|g|/β` on every interacting record.
    pub fitted_c: f64,
    pub results: Vec<CheckResult>,
}

/// Compressed commutator bottoms of `H₀` and `H(g)` on threshold-free windows.
///
/// The free bound `bottom ≥ β` is checked with slack [`FREE_MOURRE_TOL`]; the
/// interacting bound `bottom ≥ β/2 − c|g|/β` with the single fitted `c`.
/// Windows meeting a threshold and kernels without a dilation derivative are
/// rejected with an error.
pub fn check_mourre(
    basis: &FockBasis,
    params: &PhysicalParams,
    smooth: &Kernel,
    couplings: &[f64],
    windows: &[(f64, f64)],
) -> Result<MourreScan> {
    let ag = dilation_kernel(smooth)?;
    let e_max = windows.iter().map(|w| w.1).fold(0.0, f64::max) + params.m1;
    let s = thresholds(params, e_max)?;
    let betas = windows.iter().map(|&w| admissible_beta(w, &s)).collect::<Result<Vec<_>>>()?;
    let ham = Hamiltonian::new(basis, params, smooth)?;
    let c0 = commutator_a_h0(basis, params);
    let c_hi = commutator_a_hi(basis, &ag)?;

    let mut points = Vec::new();
    let free = BlockSpectrum::new(&ham.h0)?;
    for (&w, &beta) in windows.iter().zip(&betas) {
        points.push(MourrePoint { g: 0.0, record: mourre_bottom_in(&free, &c0, w, beta)? });
    }
    for &g in couplings.iter().filter(|g| **g != 0.0) {
        let spec = BlockSpectrum::new(&ham.at(g))?;
        let c = c0.linear_combination(Complex64::new(1.0, 0.0), &c_hi, Complex64::new(g, 0.0));
        for (&w, &beta) in windows.iter().zip(&betas) {
            points.push(MourrePoint { g, record: mourre_bottom_in(&spec, &c, w, beta)? });
        }
    }

    let interacting = || points.iter().filter(|p| p.g != 0.0 && !p.record.is_empty());
    let fitted_c = interacting()
        .map(|p| (p.record.beta / 2.0 - p.record.bottom) * p.record.beta / p.g.abs())
        .fold(0.0, f64::max);
    let mut free_t = Tally::inequality_abs(FREE_MOURRE_TOL);
    let mut int_t = Tally::inequality();
    let mut negative = Vec::new();
    for p in &points {
        let r = &p.record;
        if p.g == 0.0 {
            free_t.push(r.beta, r.bottom);
        } else {
            int_t.push(r.beta / 2.0 - fitted_c * p.g.abs() / r.beta, r.bottom);
            if r.bottom <= 0.0 {
                negative.push(format!("g={} [{}, {}]", p.g, r.interval.0, r.interval.1));
            }
        }
    }
    let ctx = CheckContext::for_basis(basis);
    let empty = points.iter().filter(|p| p.record.is_empty()).count();
    let mut free_r = free_t.finish("commutator-positivity-free", ctx.clone());
    if empty > 0 {
        free_r = free_r.with_note(format!("{empty} empty windows pass vacuously"));
    }
    let mut int_r = int_t.finish("commutator-positivity-interacting", ctx).with_fitted(fitted_c);
    if !negative.is_empty() {
        int_r = int_r.with_note(format!("compressed commutator not positive at {}", negative.join(", ")));
    }
    Ok(MourreScan { points, fitted_c, results: vec![free_r, int_r] })
}

/// `[A,[A,H₀]]` is bounded by `H₀` state by state, in both the closed form
/// used for the double commutator and the exact second dilation derivative,
/// and the kernel has finite regularity diagnostics.
pub fn check_double_commutator_bounded(
    basis: &FockBasis,
    params: &PhysicalParams,
    smooth: &Kernel,
) -> Result<Vec<CheckResult>> {
    let reg = regularity(smooth)?;
    let h0 = real_diagonal(&crate::model::assemble_h0(basis, params));
    let dc = real_diagonal(&double_commutator_a_a_h0(basis, params));
    let sd = real_diagonal(&second_dilation_derivative_h0(basis, params));
    let mut t_dc = Tally::inequality();
    let mut t_sd = Tally::inequality();
    for i in 0..h0.len() {
        t_dc.push(dc[i], h0[i]);
        t_sd.push(sd[i], h0[i]);
    }
    let ctx = CheckContext::for_basis(basis);
    let worst = reg.laplacian_norms.iter().copied().fold(reg.dilation_norm, f64::max);
    let mut t_reg = Tally::inequality();
    t_reg.push(if reg.is_finite() { worst } else { f64::NAN }, f64::MAX);
    Ok(vec![
        t_dc.finish("double-commutator-bounded", ctx.clone()),
        t_sd.finish("second-dilation-derivative-bounded", ctx.clone()),
        t_reg.finish("kernel-regularity-finite", ctx).with_note(format!(
            "dilation {:.6e}, radial laplacian per slot {:?}",
            reg.dilation_norm, reg.laplacian_norms
        )),
    ])
}
