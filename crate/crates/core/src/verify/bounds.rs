use super::{diag_half_norm, diag_norm, real_diagonal, CheckContext, CheckResult, Tally};
use crate::error::{Error, Result};
use crate::fock::{build_basis, FockBasis, ModeTable, Species};
use crate::model::{
    assemble_h0, assemble_hi, channel_b, channel_b_star, random_kernel, reduced_operator, species_occupation, Channel,
    Kernel, PhysicalParams, ReducedForm, ReducedKernel,
};
use crate::random::{random_state, seeded};
use crate::sparse::{norm, SparseOperator};
use crate::spectral::BlockSpectrum;
use crate::Complex64;

/// Tolerance for agreement of two operator norms computed by dense eigensolves.
const NORM_AGREEMENT_TOL: f64 = 1e-10;

/// Largest singular value, from the spectrum of `A* A`.
pub fn operator_norm(a: &SparseOperator) -> Result<f64> {
    let ata = a.adjoint().matmul(a);
    if ata.nnz() == 0 {
        return Ok(0.0);
    }
    let top = BlockSpectrum::new(&ata)?.eigenvalues().last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

fn vacuum(dim: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn truncation_note(basis: &FockBasis) -> &'static str {
    if basis.is_full() {
        ""
    } else {
        "truncated basis: operator norms are those of the compression"
    }
}

/// Norm bound for the cubic lepton annihilator `A = Σ √w conj(H) b₃ b₂ b₁`:
/// `‖A‖ = ‖A*‖ ≤ ‖H‖` per channel, for `h3` and `trials` random kernels.
pub fn check_cubic_norm(basis: &FockBasis, h3: &ReducedKernel, trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    if h3.form() != ReducedForm::Leptons123 {
        return Err(Error::Config("cubic norm check needs a species 1-2-3 kernel".into()));
    }
    let mut rng = seeded(seed);
    let mut bound = Tally::inequality();
    let mut adjoint = Tally::identity(NORM_AGREEMENT_TOL);
    for t in 0..=trials {
        let k = if t == 0 { h3.clone() } else { ReducedKernel::random(basis.table(), ReducedForm::Leptons123, &mut rng) };
        for ch in Channel::ALL {
            let a = reduced_operator(basis, &k, ch)?;
            let na = operator_norm(&a)?;
            bound.push(na, k.norm(ch));
            adjoint.push(na, operator_norm(&a.adjoint())?);
        }
    }
    let ctx = CheckContext::for_basis(basis).seed(seed);
    let note = truncation_note(basis);
    Ok(vec![
        bound.finish("cubic-annihilator-norm", ctx.clone()).with_note(note),
        adjoint.finish("cubic-annihilator-adjoint-norm", ctx).with_note(note),
    ])
}

/// Shared driver for the number-operator bounds on `Q` and `Q*`.
///
/// `Q*` is tested in the literal form `‖Q*Ψ‖ ≤ ‖G‖ ‖N₄^{1/2}Ψ‖`, which fails on
/// states without species-4 particles that `Q*` can still act on, and in the
/// form `‖Q*Ψ‖ ≤ ‖G‖ ‖(N₄+1)^{1/2}Ψ‖` that holds for every `Ψ`.
fn number_bounds(
    basis: &FockBasis,
    trials: usize,
    seed: u64,
    names: [&str; 3],
    mut ops: impl FnMut(usize, &mut crate::random::SeededRng) -> Result<Vec<(SparseOperator, f64)>>,
) -> Result<Vec<CheckResult>> {
    let n4 = species_occupation(basis, Species::FOUR);
    let n4p1: Vec<f64> = n4.iter().map(|x| x + 1.0).collect();
    let mut rng = seeded(seed);
    let mut plain = Tally::inequality();
    let mut starred = Tally::inequality();
    let mut shifted = Tally::inequality();
    for t in 0..=trials {
        let pairs = ops(t, &mut rng)?;
        let psi = if t == 0 { vacuum(basis.len()) } else { random_state(&mut rng, basis.len()) };
        let (h, hp) = (diag_half_norm(&n4, &psi), diag_half_norm(&n4p1, &psi));
        for (q, gn) in &pairs {
            plain.push(norm(&q.apply(&psi)), gn * h);
            let qs = norm(&q.adjoint().apply(&psi));
            starred.push(qs, gn * h);
            shifted.push(qs, gn * hp);
        }
    }
    let ctx = CheckContext::for_basis(basis).seed(seed);
    Ok(vec![
        plain.finish(names[0], ctx.clone()),
        starred.finish(names[1], ctx.clone()),
        shifted.finish(names[2], ctx),
    ])
}

/// `‖B Ψ‖ ≤ ‖G‖ ‖N₄^{1/2}Ψ‖` per channel and the two adjoint forms.
/// Trial 0 uses `g` and the vacuum; later trials draw a random kernel and state.
pub fn check_channel_bound(basis: &FockBasis, g: &Kernel, trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    number_bounds(
        basis,
        trials,
        seed,
        ["channel-bound", "channel-adjoint-bound", "channel-adjoint-bound-shifted"],
        |t, rng| {
            let k = if t == 0 { g.clone() } else { random_kernel(basis.table(), rng) };
            Channel::ALL
                .iter()
                .map(|&ch| {
                    let b = channel_b(basis, &k, ch)?;
                    debug_assert!(b.adjoint() == channel_b_star(basis, &k, ch)?);
                    Ok((b, k.norm(ch)))
                })
                .collect()
        },
    )
}

/// Same bounds for the reduced operators `G b₁* b₃* b₄` and `G b₁* b₂* b₄`.
pub fn check_reduced_bound(
    basis: &FockBasis,
    g2: &ReducedKernel,
    g3: &ReducedKernel,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckResult>> {
    if g2.form() != ReducedForm::Without2 || g3.form() != ReducedForm::Without3 {
        return Err(Error::Config("reduced bound needs kernels without species 2 and without species 3".into()));
    }
    number_bounds(
        basis,
        trials,
        seed,
        ["reduced-bound", "reduced-adjoint-bound", "reduced-adjoint-bound-shifted"],
        |t, rng| {
            let (k2, k3) = if t == 0 {
                (g2.clone(), g3.clone())
            } else {
                (
                    ReducedKernel::random(basis.table(), ReducedForm::Without2, rng),
                    ReducedKernel::random(basis.table(), ReducedForm::Without3, rng),
                )
            };
            let mut out = Vec::with_capacity(4);
            for k in [&k2, &k3] {
                for ch in Channel::ALL {
                    out.push((reduced_operator(basis, k, ch)?, k.norm(ch)));
                }
            }
            Ok(out)
        },
    )
}

/// The chain bounding `H_I` relative to `N₄` and then to `H₀`.
///
/// Checks `N₄ ≤ H₀/m₄` on every basis state and, on the vacuum plus `trials`
/// random states, with `S = Σ‖G‖`:
///
/// * `‖H_I Ψ‖ ≤ 2S ‖N₄^{1/2}Ψ‖` (literal) and `≤ S(‖N₄^{1/2}Ψ‖ + ‖(N₄+1)^{1/2}Ψ‖)`;
/// * for each `η`: `‖H_I Ψ‖ ≤ 2S(√(η/2)‖N₄Ψ‖ + ‖Ψ‖/√(2η))`;
/// * for each `η`: `‖H_I Ψ‖ ≤ 2S(√(η/2)‖H₀Ψ‖/m₄ + ‖Ψ‖/√(2η))`, and the form
///   derived from the shifted bound, `S(√(2η)‖H₀Ψ‖/m₄ + (√(2/η) + √(η/2))‖Ψ‖)`.
pub fn check_relative_bound(
    basis: &FockBasis,
    params: &PhysicalParams,
    g: &Kernel,
    trials: usize,
    seed: u64,
    etas: &[f64],
) -> Result<Vec<CheckResult>> {
    if let Some(eta) = etas.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    let h0 = real_diagonal(&assemble_h0(basis, params));
    let hi = assemble_hi(basis, g)?;
    let n4 = species_occupation(basis, Species::FOUR);
    let n4p1: Vec<f64> = n4.iter().map(|x| x + 1.0).collect();
    let s = g.norm_sum();
    let m4 = params.m4;
    let ctx = CheckContext::for_basis(basis).seed(seed);

    let mut diag = Tally::inequality();
    for (n, e) in n4.iter().zip(&h0) {
        diag.push(*n, e / m4);
    }

    let mut rng = seeded(seed);
    let states: Vec<Vec<Complex64>> = std::iter::once(vacuum(basis.len()))
        .chain((0..trials).map(|_| random_state(&mut rng, basis.len())))
        .collect();
    let mut literal = Tally::inequality();
    let mut shifted = Tally::inequality();
    let mut split: Vec<[Tally; 3]> = etas.iter().map(|_| [Tally::inequality(), Tally::inequality(), Tally::inequality()]).collect();
    for psi in &states {
        let lhs = norm(&hi.apply(psi));
        let (half, half1) = (diag_half_norm(&n4, psi), diag_half_norm(&n4p1, psi));
        let (n4n, h0n, pn) = (diag_norm(&n4, psi), diag_norm(&h0, psi), norm(psi));
        literal.push(lhs, 2.0 * s * half);
        shifted.push(lhs, s * (half + half1));
        for (t, &eta) in split.iter_mut().zip(etas) {
            let (a, b) = ((eta / 2.0).sqrt(), 1.0 / (2.0 * eta).sqrt());
            t[0].push(lhs, 2.0 * s * (a * n4n + b * pn));
            t[1].push(lhs, 2.0 * s * (a * h0n / m4 + b * pn));
            t[2].push(lhs, s * ((2.0 * eta).sqrt() * h0n / m4 + ((2.0 / eta).sqrt() + a) * pn));
        }
    }
    let mut out = vec![
        diag.finish("number-below-free-energy", ctx.clone()),
        literal.finish("interaction-number-bound", ctx.clone()),
        shifted.finish("interaction-number-bound-shifted", ctx.clone()),
    ];
    for ([a, b, c], &eta) in split.into_iter().zip(etas) {
        let ctx = ctx.clone().eta(eta);
        out.push(a.finish("interaction-number-split", ctx.clone()));
        out.push(b.finish("interaction-free-energy-bound", ctx.clone()));
        out.push(c.finish("interaction-free-energy-bound-shifted", ctx));
    }
    Ok(out)
}

/// Compression never increases an operator norm: the cubic annihilator norm
/// at `n_max` is at most its norm at `n_max + 1`, which stays below `‖H‖`.
pub fn check_compression(table: &ModeTable, n_max: usize, trials: usize, seed: u64) -> Result<CheckResult> {
    let small = build_basis(table.clone(), n_max)?;
    let large = build_basis(table.clone(), n_max + 1)?;
    let mut rng = seeded(seed);
    let mut tally = Tally::inequality();
    let mut above_kernel = 0;
    for _ in 0..trials.max(1) {
        let k = ReducedKernel::random(table, ReducedForm::Leptons123, &mut rng);
        for ch in Channel::ALL {
            let a = operator_norm(&reduced_operator(&small, &k, ch)?)?;
            let b = operator_norm(&reduced_operator(&large, &k, ch)?)?;
            tally.push(a, b);
            if b > k.norm(ch) * (1.0 + super::INEQUALITY_REL_TOL) {
                above_kernel += 1;
            }
        }
    }
    let mut r = tally.finish("compression-soundness", CheckContext::for_basis(&small).seed(seed));
    if above_kernel > 0 {
        r.passed = false;
        r.violations += above_kernel;
        r.note = format!("{above_kernel} norms at n_max + 1 exceed the kernel norm");
    }
    Ok(r)
}
