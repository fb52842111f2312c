//! Single-particle modes and the global mode ordering.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Maximum number of modes; occupation patterns are stored in a `u64`.
pub const MAX_MODES: usize = 64;

/// Particle species 1..=4: electrons, electron neutrinos, muon neutrinos, muons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Species(u8);

impl Species {
    pub const ONE: Species = Species(1);
    pub const TWO: Species = Species(2);
    pub const THREE: Species = Species(3);
    pub const FOUR: Species = Species(4);
    pub const ALL: [Species; 4] = [Self::ONE, Self::TWO, Self::THREE, Self::FOUR];

    pub fn new(n: u8) -> Result<Self> {
        if (1..=4).contains(&n) {
            Ok(Species(n))
        } else {
            Err(Error::Config(format!("species must be in 1..=4, got {n}")))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Zero-based position in [`Species::ALL`].
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// Species 2 and 3 are the massless neutrinos and carry helicity ±1.
    pub fn is_neutrino(self) -> bool {
        matches!(self.0, 2 | 3)
    }
}

impl TryFrom<u8> for Species {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        Species::new(n)
    }
}

impl From<Species> for u8 {
    fn from(s: Species) -> u8 {
        s.0
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Particle (`+`) or antiparticle (`-`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Charge {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Charge {
    pub const ALL: [Charge; 2] = [Charge::Plus, Charge::Minus];

    pub fn opposite(self) -> Charge {
        match self {
            Charge::Plus => Charge::Minus,
            Charge::Minus => Charge::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Charge::Plus => "+",
            Charge::Minus => "-",
        }
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Charge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "particle" => Ok(Charge::Plus),
            "-" | "\u{2212}" | "minus" | "antiparticle" => Ok(Charge::Minus),
            other => Err(Error::Config(format!("unknown charge `{other}` (expected + or -)"))),
        }
    }
}

/// Spin polarisation (species 1, 4) or helicity (species 2, 3), stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spin {
    twice: i8,
}

impl Spin {
    /// Validates `value` against the species' spin domain: {-1/2, 1/2} for
    /// species 1 and 4, {-1, 1} for species 2 and 3.
    pub fn for_species(species: Species, value: f64) -> Result<Self> {
        let twice = (2.0 * value).round();
        let ok = (2.0 * value - twice).abs() < 1e-12
            && if species.is_neutrino() {
                twice == 2.0 || twice == -2.0
            } else {
                twice == 1.0 || twice == -1.0
            };
        if !ok {
            let domain = if species.is_neutrino() { "{-1, 1}" } else { "{-1/2, 1/2}" };
            return Err(Error::Config(format!(
                "spin {value} is outside the domain {domain} of species {species}"
            )));
        }
        Ok(Spin { twice: twice as i8 })
    }

    /// Both allowed values for a species, ascending.
    pub fn all_for(species: Species) -> [Spin; 2] {
        let t = if species.is_neutrino() { 2 } else { 1 };
        [Spin { twice: -t }, Spin { twice: t }]
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }
}

/// A (species, charge) block of the global mode list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    pub species: Species,
    pub charge: Charge,
}

impl Sector {
    /// The normative order: 1+, 1-, 2+, 2-, 3+, 3-, 4+, 4-.
    pub const ALL: [Sector; 8] = [
        Sector::new(Species::ONE, Charge::Plus),
        Sector::new(Species::ONE, Charge::Minus),
        Sector::new(Species::TWO, Charge::Plus),
        Sector::new(Species::TWO, Charge::Minus),
        Sector::new(Species::THREE, Charge::Plus),
        Sector::new(Species::THREE, Charge::Minus),
        Sector::new(Species::FOUR, Charge::Plus),
        Sector::new(Species::FOUR, Charge::Minus),
    ];

    pub const fn new(species: Species, charge: Charge) -> Self {
        Sector { species, charge }
    }

    pub fn index(self) -> usize {
        2 * self.species.index() + usize::from(self.charge == Charge::Minus)
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.species, self.charge)
    }
}

/// One discretised single-particle state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub sector: Sector,
    pub momentum: [f64; 3],
    pub spin: Spin,
    /// Quadrature weight of the momentum node.
    pub weight: f64,
    /// Index of the momentum node within the sector's node list.
    pub node: usize,
}

impl Mode {
    pub fn momentum_norm(&self) -> f64 {
        let [x, y, z] = self.momentum;
        (x * x + y * y + z * z).sqrt()
    }
}

/// Assignment of sectors to grading groups. Modes in one group share a
/// Jordan-Wigner sign string; operators from different groups commute.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grading {
    group_of_sector: [u8; 8],
}

impl Grading {
    /// Species 1, species 2 and 3 together, species 4.
    pub fn standard() -> Self {
        Grading { group_of_sector: [0, 0, 1, 1, 1, 1, 2, 2] }
    }

    /// The two neutrino species commute with each other. This is the
    /// convention under which the pull-through argument is not available; it
    /// is kept as an experiment toggle and as a negative control.
    pub fn commuting_neutrinos() -> Self {
        Grading { group_of_sector: [0, 0, 1, 1, 2, 2, 3, 3] }
    }

    pub fn custom(group_of_sector: [u8; 8]) -> Self {
        Grading { group_of_sector }
    }

    pub fn group(&self, sector: Sector) -> u8 {
        self.group_of_sector[sector.index()]
    }

    pub fn same_group(&self, a: Sector, b: Sector) -> bool {
        self.group(a) == self.group(b)
    }
}

impl Default for Grading {
    fn default() -> Self {
        Self::standard()
    }
}

/// One momentum node of a species grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub momentum: [f64; 3],
    pub weight: f64,
}

/// Momentum nodes and spin values of one species, shared by both charges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesGrid {
    pub nodes: Vec<GridNode>,
    /// Spin values; for species 2 and 3 these are helicities.
    pub spins: Vec<f64>,
}

/// Per-species grids, indexed by species 1..=4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub species: Vec<SpeciesGrid>,
}

/// Explicit description of one mode, as listed in kernel files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub momentum: [f64; 3],
    pub spin: f64,
    pub weight: f64,
}

/// The ordered global mode list.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTable {
    modes: Vec<Mode>,
    sector_offsets: [usize; 9],
    grading: Grading,
    string_masks: Vec<u64>,
}

fn validate_node(momentum: [f64; 3], weight: f64, what: &str) -> Result<()> {
    let norm = momentum.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !momentum.iter().all(|x| x.is_finite()) {
        return Err(Error::Config(format!("{what}: momentum is not finite")));
    }
    if norm == 0.0 {
        return Err(Error::InfraredGrid(format!("{what}: momentum node at the origin |p| = 0")));
    }
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::Config(format!("{what}: quadrature weight must be positive, got {weight}")));
    }
    Ok(())
}

/// Builds the global mode table from per-species grids.
///
/// Within each sector modes are ordered by momentum node, then by ascending spin.
pub fn build_mode_table(grid: &GridSpec) -> Result<ModeTable> {
    build_mode_table_with(grid, Grading::standard())
}

pub fn build_mode_table_with(grid: &GridSpec, grading: Grading) -> Result<ModeTable> {
    if grid.species.len() != 4 {
        return Err(Error::Config(format!(
            "grid must list exactly 4 species, got {}",
            grid.species.len()
        )));
    }
    let mut sectors: Vec<Vec<Mode>> = Vec::with_capacity(8);
    for sector in Sector::ALL {
        let sg = &grid.species[sector.species.index()];
        if sg.nodes.is_empty() || sg.spins.is_empty() {
            return Err(Error::Config(format!("sector {sector} is empty")));
        }
        let mut spins = sg
            .spins
            .iter()
            .map(|&s| Spin::for_species(sector.species, s))
            .collect::<Result<Vec<_>>>()?;
        spins.sort();
        spins.dedup();
        let mut modes = Vec::new();
        for (node, n) in sg.nodes.iter().enumerate() {
            validate_node(n.momentum, n.weight, &format!("species {} node {node}", sector.species))?;
            for &spin in &spins {
                modes.push(Mode { sector, momentum: n.momentum, spin, weight: n.weight, node });
            }
        }
        sectors.push(modes);
    }
    ModeTable::assemble(sectors, grading)
}

impl ModeTable {
    /// Builds a table from explicit per-sector mode lists in the normative
    /// sector order. List order is kept as the within-sector order.
    pub fn from_sector_modes(sectors: &[Vec<ModeSpec>], grading: Grading) -> Result<Self> {
        if sectors.len() != 8 {
            return Err(Error::Config(format!("expected 8 sectors, got {}", sectors.len())));
        }
        let mut out = Vec::with_capacity(8);
        for (sector, specs) in Sector::ALL.into_iter().zip(sectors) {
            if specs.is_empty() {
                return Err(Error::Config(format!("sector {sector} is empty")));
            }
            let mut modes = Vec::with_capacity(specs.len());
            for (node, s) in specs.iter().enumerate() {
                validate_node(s.momentum, s.weight, &format!("sector {sector} mode {node}"))?;
                let spin = Spin::for_species(sector.species, s.spin)?;
                modes.push(Mode { sector, momentum: s.momentum, spin, weight: s.weight, node });
            }
            out.push(modes);
        }
        Self::assemble(out, grading)
    }

    fn assemble(sectors: Vec<Vec<Mode>>, grading: Grading) -> Result<Self> {
        let total: usize = sectors.iter().map(Vec::len).sum();
        if total > MAX_MODES {
            return Err(Error::Resource(format!(
                "{total} modes exceed the {MAX_MODES}-mode limit of the occupation bitset"
            )));
        }
        let mut sector_offsets = [0usize; 9];
        let mut modes = Vec::with_capacity(total);
        for (i, s) in sectors.into_iter().enumerate() {
            sector_offsets[i] = modes.len();
            modes.extend(s);
        }
        sector_offsets[8] = modes.len();
        let mut table = ModeTable { modes, sector_offsets, grading, string_masks: Vec::new() };
        table.string_masks = table.compute_string_masks();
        Ok(table)
    }

    fn compute_string_masks(&self) -> Vec<u64> {
        (0..self.modes.len())
            .map(|k| {
                let sk = self.modes[k].sector;
                (0..k)
                    .filter(|&l| self.grading.same_group(self.modes[l].sector, sk))
                    .fold(0u64, |m, l| m | (1u64 << l))
            })
            .collect()
    }

    /// Same modes under a different grading.
    pub fn with_grading(&self, grading: Grading) -> Self {
        let mut t = ModeTable {
            modes: self.modes.clone(),
            sector_offsets: self.sector_offsets,
            grading,
            string_masks: Vec::new(),
        };
        t.string_masks = t.compute_string_masks();
        t
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> &Mode {
        &self.modes[k]
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    /// Start index of every sector plus the total length.
    pub fn sector_offsets(&self) -> &[usize; 9] {
        &self.sector_offsets
    }

    pub fn sector_range(&self, sector: Sector) -> Range<usize> {
        let i = sector.index();
        self.sector_offsets[i]..self.sector_offsets[i + 1]
    }

    pub fn sector_len(&self, sector: Sector) -> usize {
        self.sector_range(sector).len()
    }

    pub fn sector_mask(&self, sector: Sector) -> u64 {
        self.sector_range(sector).fold(0, |m, k| m | (1u64 << k))
    }

    pub fn species_mask(&self, species: Species) -> u64 {
        Charge::ALL
            .iter()
            .fold(0, |m, &c| m | self.sector_mask(Sector::new(species, c)))
    }

    /// Occupied modes earlier in the same grading group contribute a sign
    /// when mode `k` is created or annihilated.
    pub fn sign_string(&self, k: usize) -> u64 {
        self.string_masks[k]
    }

    /// Per-sector occupation numbers `(q, q̄, r, r̄, s, s̄, t, t̄)`.
    pub fn occupation_counts(&self, bits: u64) -> [u32; 8] {
        let mut q = [0u32; 8];
        for s in Sector::ALL {
            q[s.index()] = (bits & self.sector_mask(s)).count_ones();
        }
        q
    }

    /// Short content hash identifying the grid and grading.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for m in &self.modes {
            h.update([m.sector.index() as u8, m.spin.twice as u8]);
            for x in m.momentum {
                h.update(x.to_le_bytes());
            }
            h.update(m.weight.to_le_bytes());
        }
        h.update(self.grading.group_of_sector);
        hex::encode(&h.finalize()[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn uniform_grid(radii: &[f64], weight: f64) -> GridSpec {
        let species = Species::ALL
            .iter()
            .map(|&sp| SpeciesGrid {
                nodes: radii
                    .iter()
                    .map(|&r| GridNode { momentum: [0.0, 0.0, r], weight })
                    .collect(),
                spins: Spin::all_for(sp).iter().map(|s| s.value()).collect(),
            })
            .collect();
        GridSpec { species }
    }

    #[test]
    fn one_node_gives_spin_multiplicity_two() {
        let t = build_mode_table(&uniform_grid(&[0.5], 1.0)).unwrap();
        let s = Sector::new(Species::ONE, Charge::Plus);
        assert_eq!(t.sector_len(s), 2);
        assert_eq!(t.len(), 16);
    }

    #[test]
    fn helicity_domain_rejects_half_integer() {
        let mut g = uniform_grid(&[0.5], 1.0);
        g.species[1].spins = vec![0.5];
        assert!(matches!(build_mode_table(&g), Err(Error::Config(_))));
        assert!(Spin::for_species(Species::TWO, 1.0).is_ok());
        assert!(Spin::for_species(Species::FOUR, -0.5).is_ok());
        assert!(Spin::for_species(Species::FOUR, 1.0).is_err());
    }

    #[test]
    fn two_nodes_two_spins_gives_32_modes_with_offsets() {
        let t = build_mode_table(&uniform_grid(&[0.5, 1.0], 0.5)).unwrap();
        assert_eq!(t.len(), 32);
        assert_eq!(t.sector_offsets()[..8], [0, 4, 8, 12, 16, 20, 24, 28]);
        // node-major, then spin
        let r = t.sector_range(Sector::ALL[2]);
        let first: Vec<(usize, f64)> = t.modes()[r].iter().map(|m| (m.node, m.spin.value())).collect();
        assert_eq!(first, vec![(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)]);
    }

    #[test]
    fn origin_and_empty_sectors_are_rejected() {
        let mut g = uniform_grid(&[0.5], 1.0);
        g.species[2].nodes[0].momentum = [0.0; 3];
        assert!(matches!(build_mode_table(&g), Err(Error::InfraredGrid(_))));
        let mut g = uniform_grid(&[0.5], 1.0);
        g.species[3].nodes.clear();
        assert!(matches!(build_mode_table(&g), Err(Error::Config(_))));
        let mut g = uniform_grid(&[0.5], 1.0);
        g.species[0].nodes[0].weight = 0.0;
        assert!(matches!(build_mode_table(&g), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_for_equal_input() {
        let g = uniform_grid(&[0.3, 0.8], 0.25);
        let a = build_mode_table(&g).unwrap();
        let b = build_mode_table(&g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn sign_strings_stay_inside_grading_groups() {
        // one mode per sector: mode index == sector index
        let g = GridSpec {
            species: Species::ALL
                .iter()
                .map(|&sp| SpeciesGrid {
                    nodes: vec![GridNode { momentum: [0.0, 0.0, 1.0], weight: 1.0 }],
                    spins: vec![Spin::all_for(sp)[1].value()],
                })
                .collect(),
        };
        let t = build_mode_table(&g).unwrap();
        assert_eq!(t.sign_string(1), 0b1);
        assert_eq!(t.sign_string(4), 0b1100);
        assert_eq!(t.sign_string(5), 0b11100);
        assert_eq!(t.sign_string(6), 0);
        assert_eq!(t.sign_string(7), 0b1000000);
        let c = t.with_grading(Grading::commuting_neutrinos());
        assert_eq!(c.sign_string(4), 0);
    }
}
