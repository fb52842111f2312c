mod common;

use common::*;
use fermiweak_core::fock::{
    annihilator, apply_ladder, build_basis, creator, smeared_annihilator, smeared_creator, Grading, Ladder, Sector,
};
use fermiweak_core::random::{complex_gaussian_vec, random_state, seeded};
use fermiweak_core::sparse::{dot, norm};
use fermiweak_core::verify::{check_algebra, operator_norm};
use fermiweak_core::Complex64;
use proptest::prelude::*;

#[test]
fn full_eight_mode_basis_satisfies_every_relation() {
    let b = basis(eight_modes(), 8);
    assert_eq!(b.len(), 256);
    let results = check_algebra(&b).unwrap();
    assert_eq!(results.len(), 4);
    for r in &results {
        assert!(r.passed, "{}", r.summary());
        assert!(r.lhs <= 1e-14, "{}", r.summary());
    }
}

#[test]
fn truncated_basis_passes_on_safe_domains() {
    for r in check_algebra(&basis(sixteen_modes(), 3)).unwrap() {
        assert!(r.passed, "{}", r.summary());
    }
}

#[test]
fn algebra_needs_two_particles() {
    assert!(check_algebra(&basis(eight_modes(), 1)).is_err());
}

#[test]
fn commuting_neutrinos_fail_the_neutrino_relation_only() {
    let table = eight_modes().with_grading(Grading::commuting_neutrinos());
    let results = check_algebra(&build_basis(table, 8).unwrap()).unwrap();
    for r in &results {
        let expect = r.name != "anticommutation-species-2-3";
        assert_eq!(r.passed, expect, "{}", r.summary());
    }
}

#[test]
fn merging_electron_and_muon_strings_breaks_their_commutation() {
    let table = eight_modes().with_grading(Grading::custom([0, 0, 1, 1, 1, 1, 0, 0]));
    let results = check_algebra(&build_basis(table, 8).unwrap()).unwrap();
    let r = results.iter().find(|r| r.name == "commutation-species-1-4").unwrap();
    assert!(!r.passed);
}

#[test]
fn smeared_annihilator_norm_equals_test_function_norm() {
    // three nodes in sector (2,+), so smearing is nontrivial; full basis
    let table = radial_table([&[0.5], &[0.2, 0.4, 0.7], &[0.3], &[0.6]], 0.7);
    let b = build_basis(table.clone(), table.len()).unwrap();
    let sector = Sector::ALL[2];
    let mut rng = seeded(11);
    for _ in 0..50 {
        let phi = complex_gaussian_vec(&mut rng, 3);
        let a = smeared_annihilator(&b, sector, &phi).unwrap();
        let w = 0.7f64;
        // ‖b(φ)‖ = (Σ w|φ|²)^{1/2} in the quadrature inner product
        let expected = (w * phi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        assert!((operator_norm(&a).unwrap() - expected).abs() < 1e-10);
        assert!((operator_norm(&smeared_creator(&b, sector, &phi).unwrap()).unwrap() - expected).abs() < 1e-10);
    }
}

#[test]
fn ladder_refuses_double_occupation_and_empty_modes() {
    let table = eight_modes();
    assert_eq!(apply_ladder(&table, Ladder::Annihilate(3), 0), None);
    assert_eq!(apply_ladder(&table, Ladder::Create(3), 1 << 3), None);
    // creating in (2,-) past an occupied (2,+) picks up one sign
    assert_eq!(apply_ladder(&table, Ladder::Create(3), 1 << 2), Some((0b1100, true)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `‖b(φ)ψ‖² + ‖b*(φ)ψ‖² = ‖φ‖²‖ψ‖²` on the full space.
    #[test]
    fn car_norm_identity(seed in any::<u64>(), sector in 0usize..8) {
        let table = sixteen_modes();
        let b = build_basis(table.clone(), 16).unwrap();
        let mut rng = seeded(seed);
        let phi = complex_gaussian_vec(&mut rng, 2);
        let psi = random_state(&mut rng, b.len());
        let s = Sector::ALL[sector];
        let lhs = norm(&smeared_annihilator(&b, s, &phi).unwrap().apply(&psi)).powi(2)
            + norm(&smeared_creator(&b, s, &phi).unwrap().apply(&psi)).powi(2);
        let rhs = 0.3 * phi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    /// `⟨χ, b_k ψ⟩ = ⟨b_k* χ, ψ⟩` for arbitrary vectors.
    #[test]
    fn creator_is_adjoint_of_annihilator(seed in any::<u64>(), k in 0usize..16) {
        let b = basis(sixteen_modes(), 3);
        let mut rng = seeded(seed);
        let (chi, psi) = (random_state(&mut rng, b.len()), random_state(&mut rng, b.len()));
        let lhs = dot(&chi, &annihilator(&b, k).apply(&psi));
        let rhs = dot(&creator(&b, k).apply(&chi), &psi);
        prop_assert!((lhs - rhs).norm() < 1e-13);
    }

    /// Two ladder operators in different grading groups commute as words.
    #[test]
    fn cross_group_words_commute(bits in 0u64..(1 << 8), k in 0usize..2, l in 6usize..8) {
        let table = eight_modes();
        let ab = apply_ladder(&table, Ladder::Create(l), bits)
            .and_then(|(x, s1)| apply_ladder(&table, Ladder::Annihilate(k), x).map(|(y, s2)| (y, s1 ^ s2)));
        let ba = apply_ladder(&table, Ladder::Annihilate(k), bits)
            .and_then(|(x, s1)| apply_ladder(&table, Ladder::Create(l), x).map(|(y, s2)| (y, s1 ^ s2)));
        prop_assert_eq!(ab, ba);
    }
}

#[test]
fn smeared_operator_is_linear_in_conjugate_test_function() {
    let b = basis(sixteen_modes(), 3);
    let s = Sector::ALL[5];
    let mut rng = seeded(2);
    let (f, g) = (complex_gaussian_vec(&mut rng, 2), complex_gaussian_vec(&mut rng, 2));
    let z = Complex64::new(0.3, -1.1);
    let fg: Vec<Complex64> = f.iter().zip(&g).map(|(a, b)| a + z * b).collect();
    let lhs = smeared_annihilator(&b, s, &fg).unwrap();
    let rhs = smeared_annihilator(&b, s, &f)
        .unwrap()
        .linear_combination(Complex64::new(1.0, 0.0), &smeared_annihilator(&b, s, &g).unwrap(), z.conj());
    assert!(lhs.sub(&rhs).max_abs() < 1e-14);
}
