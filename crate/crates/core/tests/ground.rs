mod common;

use common::*;
use fermiweak_core::fock::Species;
use fermiweak_core::model::{assemble_h, assemble_h0, random_kernel, smooth_gaussian_kernel, Hamiltonian, PhysicalParams};
use fermiweak_core::random::{random_state, seeded};
use fermiweak_core::sparse::{dot, SparseOperator};
use fermiweak_core::spectral::{dense_ground_state, ground_state, residual, SolverOptions};
use fermiweak_core::verify::{
    check_cutoff_convergence, check_number_identity, check_number_scaling, check_overlap, check_pull_through,
    cutoff_ground_state, number_identity,
};
use fermiweak_core::Complex64;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn params() -> PhysicalParams {
    PhysicalParams::new(1.0, 2.0).unwrap()
}

/// Lowest eigenvalue of the whole matrix, with no block splitting.
fn full_dense_min(h: &SparseOperator) -> f64 {
    SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn free_ground_state_is_the_vacuum() {
    let b = basis(sixteen_modes(), 3);
    let r = ground_state(&assemble_h0(&b, &params()), &SolverOptions::default()).unwrap();
    assert_eq!(r.energy, 0.0);
    assert_eq!(r.vector[0], Complex64::new(1.0, 0.0));
    assert!(r.vector[1..].iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn solver_matches_dense_diagonalisation() {
    let opts = SolverOptions::default();
    for (table, n_max, amp) in [(eight_modes(), 8, 40.0), (sixteen_modes(), 3, 60.0), (sixteen_modes(), 2, 5.0)] {
        let b = basis(table, n_max);
        assert!(b.len() <= 2000);
        let g = smooth_gaussian_kernel(b.table(), amp, 1.0).unwrap();
        let h = assemble_h(&b, &params().with_g(1.0), &g).unwrap();
        let r = ground_state(&h, &opts).unwrap();
        let e = full_dense_min(&h);
        assert!((r.energy - e).abs() < 1e-8, "dim {} solver {} dense {e}", b.len(), r.energy);
        assert!(r.residual <= opts.tol);
        assert!((r.energy - dense_ground_state(&h).unwrap().0).abs() < 1e-8);
    }
}

#[test]
fn strong_coupling_moves_the_ground_state_below_zero() {
    let b = basis(eight_modes(), 8);
    let g = smooth_gaussian_kernel(b.table(), 40.0, 1.0).unwrap();
    let h = assemble_h(&b, &params().with_g(1.0), &g).unwrap();
    let r = ground_state(&h, &SolverOptions::default()).unwrap();
    assert!(r.energy < 0.0, "{}", r.energy);
    assert!(residual(&h, r.energy, &r.vector) < 1e-9);
}

#[test]
fn solver_handles_a_dense_random_hermitian_block() {
    let n = 300;
    let mut rng = seeded(4);
    let mut trip = Vec::new();
    for i in 0..n {
        let v = random_state(&mut rng, n);
        for (j, &vj) in v.iter().enumerate().skip(i) {
            let z = if i == j { Complex64::new(vj.re, 0.0) } else { vj };
            trip.push((i, j, z));
            if i != j {
                trip.push((j, i, z.conj()));
            }
        }
    }
    let h = SparseOperator::from_triplets(n, trip);
    let r = ground_state(&h, &SolverOptions::default()).unwrap();
    assert!((r.energy - full_dense_min(&h)).abs() < 1e-8);
}

#[test]
fn infrared_cut_energies_are_nonpositive() {
    let b = basis(sixteen_modes(), 4);
    let g = smooth_gaussian_kernel(b.table(), 30.0, 1.0).unwrap();
    let opts = SolverOptions::default();
    for &coupling in &[0.05, 0.5, 1.0, 2.0] {
        for &sigma in &[1.0, 0.55, 0.25, 0.1] {
            let r = cutoff_ground_state(&b, &params(), &g, coupling, sigma, &opts).unwrap();
            assert!(r.energy <= 0.0, "g {coupling} sigma {sigma}: {}", r.energy);
        }
    }
    // above every neutrino momentum the cut kernel vanishes and H_σ = H₀
    let r = cutoff_ground_state(&b, &params(), &g, 2.0, 10.0, &opts).unwrap();
    assert_eq!(r.energy, 0.0);
}

#[test]
fn number_identity_on_random_vectors() {
    let b = basis(sixteen_modes(), 3);
    assert_eq!(b.n_modes(), 16);
    let r = check_number_identity(&b, 50, 3).unwrap();
    assert!(r.passed, "{}", r.summary());
    assert_eq!(r.trials, 100);
    assert!(number_identity(&b, Species::ONE, &random_state(&mut seeded(1), b.len())).is_err());
}

#[test]
fn pull_through_scan_at_weak_coupling() {
    let b = basis(sixteen_modes(), 3);
    let g = smooth_gaussian_kernel(b.table(), 1.0, 1.0).unwrap();
    let (results, points) =
        check_pull_through(&b, &params(), &g, 0.1, &[1.0, 0.5, 0.25, 0.1], &SolverOptions::default()).unwrap();
    for r in &results {
        assert!(r.passed, "{}", r.summary());
    }
    // the vacuum is an exact eigenvector and stays lowest at weak coupling
    assert!(points.iter().all(|p| p.energy == 0.0 && p.number == [0.0, 0.0]));
}

/// At weak coupling the ground state is the bare vacuum, so the quotient
/// `‖N_j^{1/2}φ‖²/‖H₀φ‖²` is 0/0 and no `g²` law can be read off.
#[test]
fn coupling_scaling_is_undefined_for_a_vacuum_ground_state() {
    let b = basis(sixteen_modes(), 3);
    let g = smooth_gaussian_kernel(b.table(), 1.0, 1.0).unwrap();
    let r = check_number_scaling(&b, &params(), &g, &[0.1, 0.05, 0.02, 0.01], 0.1, 0.1, &SolverOptions::default())
        .unwrap();
    assert!(!r.passed);
    assert!(r.lhs.is_nan());
}

#[test]
fn overlap_scan() {
    let b = basis(sixteen_modes(), 3);
    let g = smooth_gaussian_kernel(b.table(), 1.0, 1.0).unwrap();
    let (results, points) =
        check_overlap(&b, &params(), &g, &[0.2, 0.1, 0.05, 0.025, 0.0], 0.1, 0.5, &SolverOptions::default()).unwrap();
    for r in &results {
        assert!(r.passed, "{}", r.summary());
    }
    assert_eq!(points.last().unwrap().overlap, 1.0);
    assert!(check_overlap(&b, &params(), &g, &[0.1], 0.1, 1.5, &SolverOptions::default()).is_err());
}

#[test]
fn overlap_deficiency_at_strong_coupling_is_measured_directly() {
    let b = basis(eight_modes(), 8);
    let g = smooth_gaussian_kernel(b.table(), 40.0, 1.0).unwrap();
    let (_, points) = check_overlap(&b, &params(), &g, &[1.0], 0.1, 0.5, &SolverOptions::default()).unwrap();
    let p = &points[0];
    assert!(p.deficiency > 0.0);
    assert!((p.overlap + p.deficiency - 1.0).abs() < 1e-12);
    assert!(p.neutrino_part <= p.neutrino_number + 1e-12);
}

#[test]
fn cutoff_convergence_scan() {
    let b = basis(sixteen_modes(), 4);
    let g = random_kernel(b.table(), &mut seeded(6));
    let sigmas = [0.7, 0.55, 0.35, 0.25, 0.1];
    let r = check_cutoff_convergence(&b, &params(), &g, 0.3, &sigmas, 50, 2, 1.0).unwrap();
    for x in &r {
        assert!(x.passed, "{}", x.summary());
    }
    assert_eq!(r[2].trials, 50);
}

#[test]
fn scan_is_reproducible() {
    let b = basis(eight_modes(), 8);
    let g = smooth_gaussian_kernel(b.table(), 40.0, 1.0).unwrap();
    let h = Hamiltonian::new(&b, &params(), &g).unwrap().at(1.0);
    let opts = SolverOptions::default();
    assert_eq!(ground_state(&h, &opts).unwrap(), ground_state(&h, &opts).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The lowest eigenvalue lies below every Rayleigh quotient.
    #[test]
    fn variational_principle(seed in any::<u64>(), coupling in -3.0f64..3.0) {
        let b = basis(eight_modes(), 8);
        let g = random_kernel(b.table(), &mut seeded(seed));
        let h = assemble_h(&b, &params().with_g(coupling), &g).unwrap();
        let e = ground_state(&h, &SolverOptions::default()).unwrap().energy;
        for (i, z) in h.diagonal().iter().enumerate() {
            prop_assert!(e <= z.re + 1e-10, "state {i}");
        }
        let psi = random_state(&mut seeded(seed ^ 1), b.len());
        prop_assert!(e <= dot(&psi, &h.apply(&psi)).re + 1e-10);
    }
}
