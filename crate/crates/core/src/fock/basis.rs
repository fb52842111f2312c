//! Truncated occupation basis.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::fock::mode::{ModeTable, Sector, Species};

/// Default upper bound on the number of basis states.
pub const DEFAULT_BASIS_CAP: usize = 4_000_000;

/// Occupation pattern over the global mode list; bit `k` set means mode `k` is occupied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState(pub u64);

impl OccupationState {
    pub const VACUUM: OccupationState = OccupationState(0);

    pub fn from_modes(modes: &[usize]) -> Self {
        OccupationState(modes.iter().fold(0u64, |b, &k| b | (1u64 << k)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_occupied(self, k: usize) -> bool {
        self.0 >> k & 1 == 1
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Occupied mode indices, ascending.
    pub fn modes(self) -> impl Iterator<Item = usize> {
        let mut b = self.0;
        std::iter::from_fn(move || {
            (b != 0).then(|| {
                let k = b.trailing_zeros() as usize;
                b &= b - 1;
                k
            })
        })
    }
}

/// Pascal triangle up to n = 64, saturating at `u64::MAX`.
fn binomials() -> Vec<[u64; 65]> {
    let mut c = vec![[0u64; 65]; 65];
    for n in 0..=64 {
        c[n][0] = 1;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1].saturating_add(if k < n { c[n - 1][k] } else { 0 });
        }
    }
    c
}

/// All occupation patterns of popcount at most `n_max`, ordered by popcount
/// and then by numeric value, with the vacuum at index 0.
#[derive(Clone, Debug)]
pub struct FockBasis {
    table: ModeTable,
    n_max: usize,
    states: Vec<u64>,
    /// `offsets[k]` is the index of the first state with popcount `k`.
    offsets: Vec<usize>,
    binom: Vec<[u64; 65]>,
}

/// Enumerates the truncated basis with the default size cap.
pub fn build_basis(table: ModeTable, n_max: usize) -> Result<FockBasis> {
    FockBasis::with_cap(table, n_max, DEFAULT_BASIS_CAP)
}

impl FockBasis {
    /// Number of states the basis would have, without enumerating it.
    pub fn predicted_len(n_modes: usize, n_max: usize) -> u128 {
        let binom = binomials();
        (0..=n_max.min(n_modes)).map(|k| u128::from(binom[n_modes][k])).sum()
    }

    pub fn with_cap(table: ModeTable, n_max: usize, cap: usize) -> Result<Self> {
        let n = table.len();
        let size = Self::predicted_len(n, n_max);
        if size > cap as u128 {
            return Err(Error::Resource(format!(
                "basis with {n} modes and n_max = {n_max} has {size} states, above the cap of {cap}"
            )));
        }
        let binom = binomials();
        let top = n_max.min(n);
        let mut states = Vec::with_capacity(size as usize);
        let mut offsets = Vec::with_capacity(top + 2);
        for k in 0..=top {
            offsets.push(states.len());
            push_fixed_weight(&mut states, n, k);
        }
        offsets.push(states.len());
        Ok(FockBasis { table, n_max, states, offsets, binom })
    }

    pub fn table(&self) -> &ModeTable {
        &self.table
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.table.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> OccupationState {
        OccupationState(self.states[i])
    }

    /// True when no truncation is in effect, i.e. the basis is the full Fock space.
    pub fn is_full(&self) -> bool {
        self.n_max >= self.table.len()
    }

    /// Index range of the states with exactly `k` particles (empty if `k > n_max`).
    pub fn popcount_range(&self, k: usize) -> Range<usize> {
        if k + 1 >= self.offsets.len() {
            let end = self.states.len();
            return end..end;
        }
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Basis index of a pattern, or `None` if it lies outside the truncation.
    pub fn index_of(&self, bits: u64) -> Option<usize> {
        let k = bits.count_ones() as usize;
        if k > self.n_max || (self.table.len() < 64 && bits >> self.table.len() != 0) {
            return None;
        }
        let mut rank = 0u64;
        let mut b = bits;
        let mut i = 0;
        while b != 0 {
            let c = b.trailing_zeros() as usize;
            rank += self.binom[c][i + 1];
            b &= b - 1;
            i += 1;
        }
        Some(self.offsets[k] + rank as usize)
    }

    /// Indices of states with at most `k` particles.
    pub fn low_popcount(&self, k: usize) -> Range<usize> {
        0..self.popcount_range(k.min(self.n_max)).end
    }

    /// Occupation of a species summed over both charges.
    pub fn species_count(&self, i: usize, species: Species) -> u32 {
        (self.states[i] & self.table.species_mask(species)).count_ones()
    }

    pub fn sector_count(&self, i: usize, sector: Sector) -> u32 {
        (self.states[i] & self.table.sector_mask(sector)).count_ones()
    }
}

/// Appends all `k`-subsets of `n` bits in ascending numeric order.
fn push_fixed_weight(out: &mut Vec<u64>, n: usize, k: usize) {
    if k == 0 {
        out.push(0);
        return;
    }
    let limit: u128 = 1u128 << n;
    let mut v: u128 = (1u128 << k) - 1;
    while v < limit {
        out.push(v as u64);
        // Gosper's hack: next integer with the same popcount.
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::mode::{build_mode_table, GridNode, GridSpec, Spin, SpeciesGrid};

    fn table(nodes: usize, both_spins: bool) -> ModeTable {
        let species = Species::ALL
            .iter()
            .map(|&sp| SpeciesGrid {
                nodes: (0..nodes)
                    .map(|i| GridNode { momentum: [0.0, 0.0, 0.5 + i as f64], weight: 1.0 })
                    .collect(),
                spins: if both_spins {
                    Spin::all_for(sp).iter().map(|s| s.value()).collect()
                } else {
                    vec![Spin::all_for(sp)[1].value()]
                },
            })
            .collect();
        build_mode_table(&GridSpec { species }).unwrap()
    }

    #[test]
    fn sizes_match_binomial_counts() {
        assert_eq!(build_basis(table(1, false), 0).unwrap().len(), 1);
        assert_eq!(build_basis(table(1, false), 8).unwrap().len(), 256);
        assert_eq!(build_basis(table(2, true), 2).unwrap().len(), 1 + 32 + 496);
    }

    #[test]
    fn vacuum_first_and_popcount_major() {
        let b = build_basis(table(1, true), 3).unwrap();
        assert_eq!(b.states()[0], 0);
        for w in b.states().windows(2) {
            let (x, y) = (w[0], w[1]);
            assert!((x.count_ones(), x) < (y.count_ones(), y));
        }
    }

    #[test]
    fn index_of_is_inverse_of_states() {
        let b = build_basis(table(1, true), 4).unwrap();
        for (i, &s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
        assert_eq!(b.index_of(0b11111), None);
        assert_eq!(b.index_of(1 << 20), None);
    }

    #[test]
    fn cap_is_enforced() {
        let e = FockBasis::with_cap(table(2, true), 4, 1000).unwrap_err();
        assert!(matches!(e, Error::Resource(_)));
    }

    #[test]
    fn sixty_four_modes_enumerate_without_overflow() {
        let b = build_basis(table(4, true), 1).unwrap();
        assert_eq!(b.n_modes(), 64);
        assert_eq!(b.len(), 65);
        assert_eq!(b.index_of(1u64 << 63), Some(64));
    }
}
