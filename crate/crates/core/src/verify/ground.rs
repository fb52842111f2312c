use serde::Serialize;

use super::{diag_half_norm, diag_norm, real_diagonal, CheckContext, CheckResult, Tally, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::fock::{smeared_annihilator, FockBasis, Sector, Species};
use crate::model::{assemble_h0, assemble_hi, species_occupation, Kernel, PhysicalParams};
use crate::random::{random_state, seeded};
use crate::sparse::{norm, SparseOperator};
use crate::spectral::{ground_state, projection_neutrino_vacuum, projection_p_lambda, SolverOptions, SpectralReport};
use crate::Complex64;

/// Ground state of `H₀ + g H_I(G^σ)`.
pub fn cutoff_ground_state(
    basis: &FockBasis,
    params: &PhysicalParams,
    kernel: &Kernel,
    g: f64,
    sigma: f64,
    opts: &SolverOptions,
) -> Result<SpectralReport> {
    let h0 = assemble_h0(basis, params);
    let h = if g == 0.0 {
        h0
    } else {
        let hi = assemble_hi(basis, &kernel.infrared_cutoff(sigma)?)?;
        h0.linear_combination(Complex64::new(1.0, 0.0), &hi, Complex64::new(g, 0.0))
    };
    ground_state(&h, opts)
}

/// Pointwise fields `b(ξ_k) = b_k/√w_k` of one neutrino species, paired with
/// their quadrature weights.
fn pointwise_fields(basis: &FockBasis, species: Species) -> Result<Vec<(f64, SparseOperator)>> {
    let table = basis.table();
    let mut out = Vec::new();
    for sector in Sector::ALL.iter().filter(|s| s.species == species) {
        let range = table.sector_range(*sector);
        for k in range.clone() {
            let w = table.mode(k).weight;
            // quadrature delta at node k
            let mut delta = vec![Complex64::new(0.0, 0.0); range.len()];
            delta[k - range.start] = Complex64::new(1.0 / w, 0.0);
            out.push((w, smeared_annihilator(basis, *sector, &delta)?));
        }
    }
    Ok(out)
}

fn neutrino(species: Species) -> Result<()> {
    if species.is_neutrino() {
        Ok(())
    } else {
        Err(Error::Domain(format!("number identity is stated for species 2 and 3, got {}", species.number())))
    }
}

/// Both sides of `Σ_ε Σ_k w_k ‖b_{jε}(ξ_k) ψ‖² = ⟨ψ, N_j ψ⟩`.
pub fn number_identity(basis: &FockBasis, species: Species, psi: &[Complex64]) -> Result<(f64, f64)> {
    neutrino(species)?;
    let fields = pointwise_fields(basis, species)?;
    let n = species_occupation(basis, species);
    Ok(identity_sides(&fields, &n, psi))
}

fn identity_sides(fields: &[(f64, SparseOperator)], n: &[f64], psi: &[Complex64]) -> (f64, f64) {
    let lhs = fields.iter().map(|(w, b)| w * norm(&b.apply(psi)).powi(2)).sum();
    (lhs, diag_half_norm(n, psi).powi(2))
}

/// The number identity for species 2 and 3 on `trials` random unit vectors.
pub fn check_number_identity(basis: &FockBasis, trials: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = seeded(seed);
    let mut tally = Tally::identity(IDENTITY_TOL);
    let per_species: Vec<_> = [Species::TWO, Species::THREE]
        .into_iter()
        .map(|j| Ok((pointwise_fields(basis, j)?, species_occupation(basis, j))))
        .collect::<Result<_>>()?;
    for _ in 0..trials {
        let psi = random_state(&mut rng, basis.len());
        for (fields, n) in &per_species {
            let (l, r) = identity_sides(fields, n, &psi);
            tally.push(l, r);
        }
    }
    Ok(tally.finish("number-identity", CheckContext::for_basis(basis).seed(seed)))
}

/// One point of a σ-scan of the neutrino-number bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullThroughPoint {
    pub sigma: f64,
    pub energy: f64,
    pub residual: f64,
    /// `‖N_j^{1/2} φ_σ‖²` for j = 2, 3.
    pub number: [f64; 2],
    pub h0_norm_sq: f64,
    /// `Σ w |G|² / |p_j|²` for j = 2, 3.
    pub infrared: [f64; 2],
    /// `number / (g² · infrared · h0_norm_sq)`; NaN when both vanish.
    pub ratio: [f64; 2],
}

/// Neutrino-number bound `‖N_j^{1/2}φ_σ‖² ≤ C g² IR_j ‖H₀φ_σ‖²` over a σ-scan.
///
/// Returns the number identity on each ground state and the bound with the
/// best constant `C` over the scan. When `φ_σ` is the bare vacuum both sides
/// vanish; the bound then holds trivially and the ratio is recorded as NaN.
pub fn check_pull_through(
    basis: &FockBasis,
    params: &PhysicalParams,
    kernel: &Kernel,
    g: f64,
    sigmas: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<CheckResult>, Vec<PullThroughPoint>)> {
    let h0 = real_diagonal(&assemble_h0(basis, params));
    let species = [Species::TWO, Species::THREE];
    let fields: Vec<_> = species.iter().map(|&j| pointwise_fields(basis, j)).collect::<Result<_>>()?;
    let occ: Vec<_> = species.iter().map(|&j| species_occupation(basis, j)).collect();
    let infrared = [kernel.infrared_integral(Species::TWO)?, kernel.infrared_integral(Species::THREE)?];

    let mut identity = Tally::identity(IDENTITY_TOL);
    let mut points = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let gs = cutoff_ground_state(basis, params, kernel, g, sigma, opts)?;
        let h0n = diag_norm(&h0, &gs.vector).powi(2);
        let mut number = [0.0; 2];
        let mut ratio = [0.0; 2];
        for s in 0..2 {
            let (l, r) = identity_sides(&fields[s], &occ[s], &gs.vector);
            identity.push(l, r);
            number[s] = r;
            ratio[s] = r / (g * g * infrared[s] * h0n);
        }
        points.push(PullThroughPoint { sigma, energy: gs.energy, residual: gs.residual, number, h0_norm_sq: h0n, infrared, ratio });
    }

    let c = points.iter().flat_map(|p| p.ratio).filter(|r| !r.is_nan()).fold(0.0, f64::max);
    let mut bound = Tally::inequality();
    let mut vacuous = 0;
    for p in &points {
        for s in 0..2 {
            let rhs = g * g * p.infrared[s] * p.h0_norm_sq;
            if p.number[s] == 0.0 && rhs == 0.0 {
                vacuous += 1;
            }
            if c.is_finite() {
                bound.push(p.number[s], c * rhs);
            } else {
                bound.push(p.number[s], f64::NAN);
            }
        }
    }
    let ctx = CheckContext::for_basis(basis).g(g);
    let mut results = vec![identity.finish("number-identity-ground-state", ctx.clone())];
    let mut r = bound.finish("neutrino-number-bound", ctx).with_fitted(c);
    if vacuous > 0 {
        r = r.with_note(format!("{vacuous} of {} cases have a vacuum ground state: both sides vanish", 2 * points.len()));
    }
    results.push(r);
    Ok((results, points))
}

/// `g²` scaling of `‖N_j^{1/2}φ‖² / ‖H₀φ‖²` at fixed σ.
///
/// For every coupling the quotient `q(g) = ‖N_j^{1/2}φ‖² / (g² ‖H₀φ‖²)` is
/// formed; the check passes when `max q / min q − 1 ≤ tol` for j = 2 and 3.
/// An undefined quotient fails the check.
pub fn check_number_scaling(
    basis: &FockBasis,
    params: &PhysicalParams,
    kernel: &Kernel,
    couplings: &[f64],
    sigma: f64,
    tol: f64,
    opts: &SolverOptions,
) -> Result<CheckResult> {
    if couplings.contains(&0.0) {
        return Err(Error::Domain("coupling scaling needs nonzero couplings".into()));
    }
    let h0 = real_diagonal(&assemble_h0(basis, params));
    let occ = [species_occupation(basis, Species::TWO), species_occupation(basis, Species::THREE)];
    let mut q: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut vacuum = 0;
    for &g in couplings {
        let gs = cutoff_ground_state(basis, params, kernel, g, sigma, opts)?;
        let h0n = diag_norm(&h0, &gs.vector).powi(2);
        if h0n == 0.0 {
            vacuum += 1;
        }
        for s in 0..2 {
            q[s].push(diag_half_norm(&occ[s], &gs.vector).powi(2) / (g * g * h0n));
        }
    }
    let spread = |v: &[f64]| {
        if v.iter().any(|x| !x.is_finite()) {
            return f64::NAN;
        }
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        hi / lo - 1.0
    };
    let mut tally = Tally::inequality();
    for v in &q {
        tally.push(spread(v), tol);
    }
    let mut r = tally.finish("neutrino-number-coupling-scaling", CheckContext::for_basis(basis).sigma(sigma));
    r.tolerance = 0.0;
    if vacuum > 0 {
        r = r.with_note(format!(
            "{vacuum} of {} couplings give the bare vacuum as ground state: the quotient is 0/0",
            couplings.len()
        ));
    }
    Ok(r)
}

/// Ground-state composition at one coupling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapPoint {
    pub g: f64,
    pub energy: f64,
    pub residual: f64,
    /// `⟨φ, P(λ) P_Ωneut φ⟩`.
    pub overlap: f64,
    /// `‖(1 − P(λ)P_Ωneut) φ‖²`, computed directly rather than as `1 − overlap`.
    pub deficiency: f64,
    /// `⟨φ, P(λ)^⊥ P_Ωneut φ⟩`.
    pub massive_part: f64,
    /// `‖P_Ωneut^⊥ φ‖`.
    pub neutrino_part: f64,
    /// `‖N₂^{1/2}φ‖ + ‖N₃^{1/2}φ‖`.
    pub neutrino_number: f64,
    /// `⟨φ, N_j φ⟩` for j = 2, 3.
    pub number: [f64; 2],
    /// `‖H₀ φ‖`, reported only.
    pub h0_norm: f64,
}

/// Overlap of the ground state with `P(λ) ⊗ P_Ωneut` along a coupling scan.
///
/// Records, with `d(g)` the deficiency:
/// * `d` nonincreasing as `|g|` decreases (noise allowance `IDENTITY_TOL`);
/// * `d ≤ c̃|g|` with `c̃` fitted over the scan;
/// * `⟨P(λ)^⊥ P_Ωneut⟩ ≤ C|g|/m₁` with `C` fitted;
/// * `‖P_Ωneut^⊥ φ‖ ≤ ‖N₂^{1/2}φ‖ + ‖N₃^{1/2}φ‖` with constant one.
#[allow(clippy::too_many_arguments)]
pub fn check_overlap(
    basis: &FockBasis,
    params: &PhysicalParams,
    kernel: &Kernel,
    couplings: &[f64],
    sigma: f64,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<(Vec<CheckResult>, Vec<OverlapPoint>)> {
    let points = couplings
        .iter()
        .map(|&g| overlap_point(basis, params, kernel, g, sigma, lambda, opts))
        .collect::<Result<Vec<_>>>()?;
    let ctx = CheckContext::for_basis(basis).sigma(sigma).lambda(lambda);

    let mut order: Vec<&OverlapPoint> = points.iter().collect();
    order.sort_by(|a, b| b.g.abs().total_cmp(&a.g.abs()));
    let mut trend = Tally::inequality();
    for w in order.windows(2) {
        trend.push(w[1].deficiency, w[0].deficiency + IDENTITY_TOL);
    }

    let fit = |f: &dyn Fn(&OverlapPoint) -> f64| {
        points.iter().filter(|p| p.g != 0.0).map(|p| f(p) / p.g.abs()).fold(0.0, f64::max)
    };
    let c_lin = fit(&|p| p.deficiency);
    let c_massive = fit(&|p| p.massive_part * params.m1);
    let mut linear = Tally::inequality();
    let mut massive = Tally::inequality();
    let mut number = Tally::inequality();
    for p in &points {
        linear.push(p.deficiency, c_lin * p.g.abs());
        massive.push(p.massive_part, c_massive * p.g.abs() / params.m1);
        number.push(p.neutrino_part, p.neutrino_number);
    }
    let exact = points.iter().filter(|p| p.deficiency == 0.0).count();
    let mut trend = trend.finish("overlap-deficiency-trend", ctx.clone());
    if exact > 0 {
        trend = trend.with_note(format!("{exact} of {} ground states lie entirely in the range", points.len()));
    }
    Ok((
        vec![
            trend,
            linear.finish("overlap-deficiency-linear", ctx.clone()).with_fitted(c_lin),
            massive.finish("overlap-massive-excitation", ctx.clone()).with_fitted(c_massive),
            number.finish("overlap-neutrino-number", ctx),
        ],
        points,
    ))
}

pub fn overlap_point(
    basis: &FockBasis,
    params: &PhysicalParams,
    kernel: &Kernel,
    g: f64,
    sigma: f64,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<OverlapPoint> {
    let p_lambda = real_diagonal(&projection_p_lambda(basis, params, lambda)?);
    let p_neut = real_diagonal(&projection_neutrino_vacuum(basis));
    let h0 = real_diagonal(&assemble_h0(basis, params));
    let n2 = species_occupation(basis, Species::TWO);
    let n3 = species_occupation(basis, Species::THREE);
    let gs = cutoff_ground_state(basis, params, kernel, g, sigma, opts)?;
    let phi = &gs.vector;
    let mut overlap = 0.0;
    let mut deficiency = 0.0;
    let mut massive_part = 0.0;
    let mut neutrino_sq = 0.0;
    for i in 0..phi.len() {
        let a = phi[i].norm_sqr();
        let (pl, pn) = (p_lambda[i], p_neut[i]);
        if pl * pn == 1.0 {
            overlap += a;
        } else {
            deficiency += a;
        }
        if pn == 1.0 && pl == 0.0 {
            massive_part += a;
        }
        if pn == 0.0 {
            neutrino_sq += a;
        }
    }
    Ok(OverlapPoint {
        g,
        energy: gs.energy,
        residual: gs.residual,
        overlap,
        deficiency,
        massive_part,
        neutrino_part: neutrino_sq.sqrt(),
        neutrino_number: diag_half_norm(&n2, phi) + diag_half_norm(&n3, phi),
        number: [diag_half_norm(&n2, phi).powi(2), diag_half_norm(&n3, phi).powi(2)],
        h0_norm: diag_norm(&h0, phi),
    })
}

/// Convergence of the infrared-cut Hamiltonian on random states.
///
/// With `K = G − G^σ`, checks `|g|‖H_I(K)Ψ‖ ≤ 2|g| Σ‖K‖ (√η ‖H₀Ψ‖ + ‖Ψ‖/√η)`
/// at every σ, that the left side is nonincreasing as σ decreases, and that it
/// vanishes once σ is at or below the smallest neutrino momentum.
#[allow(clippy::too_many_arguments)]
pub fn check_cutoff_convergence(
    basis: &FockBasis,
    params: &PhysicalParams,
    kernel: &Kernel,
    g: f64,
    sigmas: &[f64],
    trials: usize,
    seed: u64,
    eta: f64,
) -> Result<Vec<CheckResult>> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    let mut sorted = sigmas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let h0 = real_diagonal(&assemble_h0(basis, params));
    let one = Complex64::new(1.0, 0.0);
    let diffs = sorted
        .iter()
        .map(|&s| {
            let k = kernel.linear_combination(one, &kernel.infrared_cutoff(s)?, -one)?;
            Ok((assemble_hi(basis, &k)?, k.norm_sum()))
        })
        .collect::<Result<Vec<_>>>()?;
    let p_min = basis
        .table()
        .modes()
        .iter()
        .filter(|m| m.sector.species.is_neutrino())
        .map(|m| m.momentum_norm())
        .fold(f64::INFINITY, f64::min);

    let mut rng = seeded(seed);
    let mut bound = Tally::inequality();
    let mut monotone = Tally::inequality();
    let mut limit = Tally::identity(IDENTITY_TOL);
    let (se, ise) = (eta.sqrt(), 1.0 / eta.sqrt());
    for _ in 0..trials {
        let psi = random_state(&mut rng, basis.len());
        let (h0n, pn) = (diag_norm(&h0, &psi), norm(&psi));
        let mut prev = f64::INFINITY;
        for ((op, kn), &s) in diffs.iter().zip(&sorted) {
            let lhs = g.abs() * norm(&op.apply(&psi));
            bound.push(lhs, 2.0 * g.abs() * kn * (se * h0n + ise * pn));
            if prev.is_finite() {
                monotone.push(lhs, prev);
            }
            if s <= p_min {
                limit.push(lhs, 0.0);
            }
            prev = lhs;
        }
    }
    let ctx = CheckContext::for_basis(basis).g(g).eta(eta).seed(seed);
    let mut lim = limit.finish("cutoff-difference-limit", ctx.clone());
    if lim.trials == 0 {
        lim = lim.with_note("no cutoff at or below the smallest neutrino momentum");
    }
    Ok(vec![
        bound.finish("cutoff-difference-bound", ctx.clone()),
        monotone.finish("cutoff-difference-monotone", ctx),
        lim,
    ])
}
