use super::{CheckContext, CheckResult, Tally, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::fock::{annihilator, creator, FockBasis, Grading, Species};
use crate::sparse::SparseOperator;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Relation {
    WithinSpecies,
    Neutrinos,
    ElectronMuon,
    AcrossGroups,
}

const RELATIONS: [(Relation, &str); 4] = [
    (Relation::WithinSpecies, "car-within-species"),
    (Relation::Neutrinos, "anticommutation-species-2-3"),
    (Relation::ElectronMuon, "commutation-species-1-4"),
    (Relation::AcrossGroups, "commutation-across-groups"),
];

fn relation(a: Species, b: Species) -> Relation {
    let (x, y) = (a.number().min(b.number()), a.number().max(b.number()));
    match (x, y) {
        _ if x == y => Relation::WithinSpecies,
        (2, 3) => Relation::Neutrinos,
        (1, 4) => Relation::ElectronMuon,
        _ => Relation::AcrossGroups,
    }
}

/// Ladder relations on the subspaces where truncation cannot interfere.
///
/// The expected relation is always the standard one (species 2 and 3 share a
/// sign string, every other pair of species commutes), whatever grading the
/// basis was built with. A basis with a different grading therefore fails.
/// `{b, b*}` is checked on states with at most `n_max − 1` particles and
/// `{b*, b*}` on states with at most `n_max − 2`.
pub fn check_algebra(basis: &FockBasis) -> Result<Vec<CheckResult>> {
    if basis.n_max() < 2 {
        return Err(Error::Domain(format!("algebra checks need n_max >= 2, got {}", basis.n_max())));
    }
    let table = basis.table();
    let standard = Grading::standard();
    let n = table.len();
    let b: Vec<SparseOperator> = (0..n).map(|k| annihilator(basis, k)).collect();
    let bs: Vec<SparseOperator> = b.iter().map(|x| x.adjoint()).collect();
    debug_assert!(n == 0 || bs[0] == creator(basis, 0));
    let states = basis.states();
    let popcount = |c: usize| states[c].count_ones() as usize;
    let n_max = basis.n_max();

    let mut tallies: Vec<Tally> = RELATIONS.iter().map(|_| Tally::identity(IDENTITY_TOL)).collect();
    for k in 0..n {
        for l in 0..n {
            let (mk, ml) = (table.mode(k), table.mode(l));
            let rel = relation(mk.sector.species, ml.sector.species);
            let anti = standard.same_group(mk.sector, ml.sector);
            let bracket = |x: &SparseOperator, y: &SparseOperator| {
                if anti {
                    x.anticommutator(y)
                } else {
                    x.commutator(y)
                }
            };
            let mut mixed = bracket(&b[k], &bs[l]);
            if k == l {
                mixed = mixed.sub(&SparseOperator::identity(basis.len()));
            }
            let dev = mixed
                .max_abs_in_columns(|c| popcount(c) < n_max)
                .max(bracket(&b[k], &b[l]).max_abs())
                .max(bracket(&bs[k], &bs[l]).max_abs_in_columns(|c| popcount(c) + 2 <= n_max));
            let slot = RELATIONS.iter().position(|(r, _)| *r == rel).expect("listed");
            tallies[slot].push(dev, 0.0);
        }
    }
    let ctx = CheckContext::for_basis(basis);
    Ok(tallies
        .into_iter()
        .zip(RELATIONS)
        .map(|(t, (_, name))| {
            let empty = t.trials() == 0;
            let r = t.finish(name, ctx.clone());
            if empty {
                r.with_note("no mode pairs of this kind in the table")
            } else {
                r
            }
        })
        .collect())
}

