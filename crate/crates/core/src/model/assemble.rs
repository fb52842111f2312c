//! Sparse assembly of the free and interaction Hamiltonians.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{apply_word, assemble_columns, diagonal_operator, FockBasis, Ladder, ModeTable, Species};
use crate::model::kernel::{Channel, ChannelTensor, Kernel, ReducedForm, ReducedKernel};
use crate::model::params::{dispersion, PhysicalParams};
use crate::sparse::SparseOperator;

/// `H₀ = Σ_k ω(p_k) n_k`.
pub fn assemble_h0(basis: &FockBasis, params: &PhysicalParams) -> SparseOperator {
    let omega = mode_energies(basis.table(), params);
    diagonal_operator(basis, |bits| occupied_sum(bits, &omega))
}

/// Free one-particle energy of every global mode.
pub fn mode_energies(table: &ModeTable, params: &PhysicalParams) -> Vec<f64> {
    table.modes().iter().map(|m| dispersion(m.sector.species, m.momentum, params)).collect()
}

pub(crate) fn occupied_sum(bits: u64, values: &[f64]) -> f64 {
    let mut b = bits;
    let mut s = 0.0;
    while b != 0 {
        s += values[b.trailing_zeros() as usize];
        b &= b - 1;
    }
    s
}

/// One slot of a tensor-weighted ladder monomial.
#[derive(Clone, Copy, Debug)]
struct Slot {
    start: usize,
    len: usize,
    create: bool,
}

/// `Σ_tuples √(Π w) · c(T) · word`, where slot `s` of the tensor supplies the
/// mode of the `s`-th ladder factor and `order` lists the slots as written in
/// the operator product, left to right. `c` is the identity or conjugation.
fn tensor_operator(
    basis: &FockBasis,
    tensor: &ChannelTensor,
    create: &[bool],
    order: &[usize],
    conjugate: bool,
) -> SparseOperator {
    let table = basis.table();
    let slots: Vec<Slot> = tensor
        .sectors()
        .iter()
        .zip(create)
        .map(|(&s, &c)| {
            let r = table.sector_range(s);
            Slot { start: r.start, len: r.len(), create: c }
        })
        .collect();
    let sqrt_w: Vec<Vec<f64>> = slots
        .iter()
        .map(|s| (s.start..s.start + s.len).map(|k| table.mode(k).weight.sqrt()).collect())
        .collect();
    let dims = tensor.dims();
    let data = tensor.data();
    let r = slots.len();
    assemble_columns(basis, |bits, out| {
        // admissible local indices per slot: annihilated modes occupied, created modes free
        let cands: Vec<Vec<usize>> = slots
            .iter()
            .map(|s| (0..s.len).filter(|&i| (bits >> (s.start + i) & 1 == 1) != s.create).collect())
            .collect();
        if cands.iter().any(Vec::is_empty) {
            return;
        }
        let mut pos = vec![0usize; r];
        let mut word = [Ladder::Create(0); 4];
        loop {
            let mut flat = 0;
            for s in 0..r {
                flat = flat * dims[s] + cands[s][pos[s]];
            }
            let t = data[flat];
            if t != Complex64::new(0.0, 0.0) {
                for (w, &s) in word.iter_mut().zip(order) {
                    let k = slots[s].start + cands[s][pos[s]];
                    *w = if slots[s].create { Ladder::Create(k) } else { Ladder::Annihilate(k) };
                }
                if let Some((target, sign)) = apply_word(table, &word[..r], bits) {
                    let w: f64 = (0..r).map(|s| sqrt_w[s][cands[s][pos[s]]]).product();
                    let c = if conjugate { t.conj() } else { t };
                    out.push((target, c * (w * sign)));
                }
            }
            let mut s = r;
            loop {
                if s == 0 {
                    return;
                }
                s -= 1;
                pos[s] += 1;
                if pos[s] < cands[s].len() {
                    break;
                }
                pos[s] = 0;
            }
        }
    })
}

fn check_kernel(basis: &FockBasis, g: &Kernel) -> Result<()> {
    if g.matches_table(basis.table()) {
        Ok(())
    } else {
        Err(Error::Config("kernel sectors do not match the basis mode table".into()))
    }
}

/// `B_{εε′} = Σ √w G b₁* b₂* b₃* b₄`.
pub fn channel_b(basis: &FockBasis, g: &Kernel, ch: Channel) -> Result<SparseOperator> {
    check_kernel(basis, g)?;
    Ok(tensor_operator(basis, g.tensor(ch), &[true, true, true, false], &[0, 1, 2, 3], false))
}

/// `B*_{εε′} = Σ √w conj(G) b₄* b₃ b₂ b₁`, assembled directly rather than as
/// an adjoint.
pub fn channel_b_star(basis: &FockBasis, g: &Kernel, ch: Channel) -> Result<SparseOperator> {
    check_kernel(basis, g)?;
    Ok(tensor_operator(basis, g.tensor(ch), &[false, false, false, true], &[3, 2, 1, 0], true))
}

/// `H_I = Σ_{ε≠ε′} (B_{εε′} + B*_{εε′})`.
pub fn assemble_hi(basis: &FockBasis, g: &Kernel) -> Result<SparseOperator> {
    let mut h = SparseOperator::zeros(basis.len());
    for ch in Channel::ALL {
        if g.tensor(ch).is_zero() {
            continue;
        }
        let b = channel_b(basis, g, ch)?;
        h = h.add(&b).add(&b.adjoint());
    }
    Ok(h)
}

/// `H = H₀ + g H_I` with `g = params.g`.
pub fn assemble_h(basis: &FockBasis, params: &PhysicalParams, g: &Kernel) -> Result<SparseOperator> {
    Ok(Hamiltonian::new(basis, params, g)?.at(params.g))
}

/// Cubic operator of a reduced kernel:
/// `Σ √w conj(H) b₃ b₂ b₁` for [`ReducedForm::Leptons123`] and
/// `Σ √w G b₁* b_j* b₄` for the two forms without species `j`.
pub fn reduced_operator(basis: &FockBasis, h: &ReducedKernel, ch: Channel) -> Result<SparseOperator> {
    if !h.matches_table(basis.table()) {
        return Err(Error::Config("reduced kernel sectors do not match the basis mode table".into()));
    }
    let t = h.tensor(ch);
    Ok(match h.form() {
        ReducedForm::Leptons123 => tensor_operator(basis, t, &[false, false, false], &[2, 1, 0], true),
        ReducedForm::Without2 | ReducedForm::Without3 => {
            tensor_operator(basis, t, &[true, true, false], &[0, 1, 2], false)
        }
    })
}

/// Free and interaction parts kept apart so that scans over `g` reuse them.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub h0: SparseOperator,
    pub hi: SparseOperator,
}

impl Hamiltonian {
    pub fn new(basis: &FockBasis, params: &PhysicalParams, g: &Kernel) -> Result<Self> {
        Ok(Hamiltonian { h0: assemble_h0(basis, params), hi: assemble_hi(basis, g)? })
    }

    pub fn at(&self, g: f64) -> SparseOperator {
        if g == 0.0 {
            return self.h0.clone();
        }
        self.h0.linear_combination(Complex64::new(1.0, 0.0), &self.hi, Complex64::new(g, 0.0))
    }
}

/// `N₄` eigenvalue bound helper: species occupation of a basis state.
pub fn species_occupation(basis: &FockBasis, species: Species) -> Vec<f64> {
    let mask = basis.table().species_mask(species);
    basis.states().iter().map(|&b| f64::from((b & mask).count_ones())).collect()
}
