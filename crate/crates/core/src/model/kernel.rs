//! Interaction kernels on the discretised mode grid.
//!
//! A kernel is stored as one dense complex tensor per charge channel
//! `(ε, ε′)` with `ε ≠ ε′`. The four tensor slots run over the modes of the
//! sectors `(1,ε)`, `(2,ε′)`, `(3,ε)`, `(4,ε)` in mode-table order. Norms are
//! quadrature norms: `‖G‖² = Σ w₁w₂w₃w₄ |G|²`.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Charge, Mode, ModeTable, Sector, Species};
use crate::model::params::norm3;
use crate::random::complex_gaussian;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Charge channel `(ε, ε′)` with `ε ≠ ε′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "+-")]
    PlusMinus,
    #[serde(rename = "-+")]
    MinusPlus,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::PlusMinus, Channel::MinusPlus];

    pub fn from_charges(eps: Charge, eps_prime: Charge) -> Result<Self> {
        match (eps, eps_prime) {
            (Charge::Plus, Charge::Minus) => Ok(Channel::PlusMinus),
            (Charge::Minus, Charge::Plus) => Ok(Channel::MinusPlus),
            _ => Err(Error::Config(format!("channel ({eps},{eps_prime}) is not allowed: need eps != eps_prime"))),
        }
    }

    pub fn eps(self) -> Charge {
        match self {
            Channel::PlusMinus => Charge::Plus,
            Channel::MinusPlus => Charge::Minus,
        }
    }

    pub fn eps_prime(self) -> Charge {
        self.eps().opposite()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Sectors of the four interaction slots.
    pub fn sectors(self) -> [Sector; 4] {
        let (e, ep) = (self.eps(), self.eps_prime());
        [
            Sector::new(Species::ONE, e),
            Sector::new(Species::TWO, ep),
            Sector::new(Species::THREE, e),
            Sector::new(Species::FOUR, e),
        ]
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.eps(), self.eps_prime())
    }
}

/// Dense tensor over mode tuples of fixed sectors, with its cached norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTensor {
    channel: Channel,
    sectors: Vec<Sector>,
    dims: Vec<usize>,
    data: Vec<Complex64>,
    l2_norm: f64,
}

impl ChannelTensor {
    fn build(table: &ModeTable, channel: Channel, sectors: Vec<Sector>, data: Vec<Complex64>) -> Self {
        let dims: Vec<usize> = sectors.iter().map(|&s| table.sector_len(s)).collect();
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        let mut t = ChannelTensor { channel, sectors, dims, data, l2_norm: 0.0 };
        t.l2_norm = t.compute_norm(table);
        t
    }

    fn from_fn(
        table: &ModeTable,
        channel: Channel,
        sectors: Vec<Sector>,
        mut f: impl FnMut(&[&Mode]) -> Complex64,
    ) -> Self {
        let ranges: Vec<_> = sectors.iter().map(|&s| table.sector_range(s)).collect();
        let dims: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
        let mut data = Vec::with_capacity(dims.iter().product());
        let mut modes: Vec<&Mode> = Vec::with_capacity(dims.len());
        for_each_index(&dims, |idx| {
            modes.clear();
            modes.extend(idx.iter().zip(&ranges).map(|(&i, r)| table.mode(r.start + i)));
            data.push(f(&modes));
        });
        Self::build(table, channel, sectors, data)
    }

    /// Quadrature weight product for every flat index.
    pub fn weight_products(&self, table: &ModeTable) -> Vec<f64> {
        let ranges: Vec<_> = self.sectors.iter().map(|&s| table.sector_range(s)).collect();
        let mut w = Vec::with_capacity(self.data.len());
        for_each_index(&self.dims, |idx| {
            w.push(idx.iter().zip(&ranges).map(|(&i, r)| table.mode(r.start + i).weight).product());
        });
        w
    }

    fn compute_norm(&self, table: &ModeTable) -> f64 {
        self.weight_products(table)
            .iter()
            .zip(&self.data)
            .map(|(w, g)| w * g.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.flat_index(idx)]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&z| z == ZERO)
    }

    fn map(&self, table: &ModeTable, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let data = self.data.iter().enumerate().map(|(i, &z)| f(i, z)).collect();
        Self::build(table, self.channel, self.sectors.clone(), data)
    }
}

/// Calls `f` with every multi-index below `dims`, last index fastest.
pub(crate) fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// How a kernel was produced; decides how its dilation derivative is taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelOrigin {
    /// Indicator of `max |p_j| ≤ lambda`.
    Sharp { lambda: f64 },
    /// Nonzero entries equal `amplitude · exp(-Σ|p_j|²/lambda²)`.
    Gaussian { amplitude: f64, lambda: f64 },
    /// Arbitrary tensor (file input, random, linear combination).
    User,
    /// Neutrino infrared cut of another kernel; `zeroed` counts nonzero entries removed.
    InfraredCut { sigma: f64, zeroed: usize, parent: Box<KernelOrigin> },
}

fn tables_match(a: &ModeTable, b: &ModeTable) -> bool {
    a.modes() == b.modes()
}

/// Four-slot interaction kernel `G_{εε′}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    table: ModeTable,
    tensors: [ChannelTensor; 2],
    origin: KernelOrigin,
}

impl Kernel {
    pub fn from_fn(
        table: &ModeTable,
        origin: KernelOrigin,
        mut f: impl FnMut(Channel, &[&Mode]) -> Complex64,
    ) -> Self {
        let tensors = Channel::ALL.map(|ch| ChannelTensor::from_fn(table, ch, ch.sectors().to_vec(), |m| f(ch, m)));
        Kernel { table: table.clone(), tensors, origin }
    }

    pub fn zeros(table: &ModeTable) -> Self {
        Self::from_fn(table, KernelOrigin::User, |_, _| ZERO)
    }

    /// Sparse construction from `(channel, [i1, i2, i3, i4], value)` entries,
    /// with sector-local indices. Unlisted entries are zero; repeats add up.
    pub fn from_entries(table: &ModeTable, entries: &[(Channel, [usize; 4], Complex64)]) -> Result<Self> {
        let mut k = Self::zeros(table);
        for &(ch, idx, v) in entries {
            let t = &mut k.tensors[ch.index()];
            if let Some((slot, (&i, &d))) = idx.iter().zip(&t.dims).enumerate().find(|(_, (&i, &d))| i >= d) {
                return Err(Error::Config(format!(
                    "kernel entry {ch} index {i} in slot {} is out of range (sector has {d} modes)",
                    slot + 1
                )));
            }
            let f = t.flat_index(&idx);
            t.data[f] += v;
        }
        k.refresh_norms();
        Ok(k)
    }

    fn refresh_norms(&mut self) {
        for t in &mut self.tensors {
            t.l2_norm = t.compute_norm(&self.table);
        }
    }

    pub fn table(&self) -> &ModeTable {
        &self.table
    }

    pub fn matches_table(&self, table: &ModeTable) -> bool {
        tables_match(&self.table, table)
    }

    pub fn origin(&self) -> &KernelOrigin {
        &self.origin
    }

    pub fn tensor(&self, ch: Channel) -> &ChannelTensor {
        &self.tensors[ch.index()]
    }

    pub fn tensors(&self) -> &[ChannelTensor; 2] {
        &self.tensors
    }

    /// Cached quadrature norm `‖G_{εε′}‖`.
    pub fn norm(&self, ch: Channel) -> f64 {
        self.tensor(ch).l2_norm
    }

    /// `Σ_{ε≠ε′} ‖G_{εε′}‖`.
    pub fn norm_sum(&self) -> f64 {
        self.tensors.iter().map(|t| t.l2_norm).sum()
    }

    /// Largest gap between the cached norms and a fresh recomputation.
    pub fn norm_cache_defect(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| (t.l2_norm - t.compute_norm(&self.table)).abs())
            .fold(0.0, f64::max)
    }

    /// Channels with at least one nonzero entry.
    pub fn populated_channels(&self) -> Vec<Channel> {
        self.tensors.iter().filter(|t| !t.is_zero()).map(|t| t.channel).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.tensors.iter().all(ChannelTensor::is_zero)
    }

    fn with_tensors(&self, tensors: [ChannelTensor; 2], origin: KernelOrigin) -> Self {
        Kernel { table: self.table.clone(), tensors, origin }
    }

    /// Entrywise map with access to the four slot modes.
    pub fn map_entries(&self, origin: KernelOrigin, f: impl Fn(Channel, &[&Mode], Complex64) -> Complex64) -> Self {
        let table = &self.table;
        let mut out = Self::from_fn(table, origin, |_, _| ZERO);
        for (dst, src) in out.tensors.iter_mut().zip(&self.tensors) {
            let ranges: Vec<_> = src.sectors.iter().map(|&s| table.sector_range(s)).collect();
            let mut flat = 0;
            let mut modes = Vec::with_capacity(4);
            for_each_index(&src.dims, |idx| {
                modes.clear();
                modes.extend(idx.iter().zip(&ranges).map(|(&i, r)| table.mode(r.start + i)));
                dst.data[flat] = f(src.channel, &modes, src.data[flat]);
                flat += 1;
            });
        }
        out.refresh_norms();
        out
    }

    /// New user kernel with entries `f(data[channel][i], G_channel[i])`.
    pub(crate) fn zip_data(&self, data: &[Vec<Complex64>], f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let tensors = [0, 1].map(|c| self.tensors[c].map(&self.table, |i, z| f(data[c][i], z)));
        self.with_tensors(tensors, KernelOrigin::User)
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: Complex64, other: &Kernel, b: Complex64) -> Result<Self> {
        if !tables_match(&self.table, &other.table) {
            return Err(Error::Config("kernels live on different mode tables".into()));
        }
        let tensors = [0, 1].map(|c| {
            self.tensors[c].map(&self.table, |i, z| a * z + b * other.tensors[c].data[i])
        });
        Ok(self.with_tensors(tensors, KernelOrigin::User))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let origin = match (&self.origin, a.im == 0.0) {
            (KernelOrigin::Gaussian { amplitude, lambda }, true) => {
                KernelOrigin::Gaussian { amplitude: amplitude * a.re, lambda: *lambda }
            }
            _ => KernelOrigin::User,
        };
        let tensors = self.tensors.clone().map(|t| t.map(&self.table, |_, z| a * z));
        self.with_tensors(tensors, origin)
    }

    /// `G^σ`: entries with a neutrino momentum `|p₂| < σ` or `|p₃| < σ` set to zero.
    pub fn infrared_cutoff(&self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::Domain(format!("infrared cutoff must be nonnegative, got {sigma}")));
        }
        let cut = self.map_entries(KernelOrigin::User, |_, m, z| {
            if m[1].momentum_norm() < sigma || m[2].momentum_norm() < sigma {
                ZERO
            } else {
                z
            }
        });
        let zeroed = cut
            .tensors
            .iter()
            .zip(&self.tensors)
            .map(|(a, b)| a.data.iter().zip(&b.data).filter(|(x, y)| **x == ZERO && **y != ZERO).count())
            .sum();
        let origin = KernelOrigin::InfraredCut { sigma, zeroed, parent: Box::new(self.origin.clone()) };
        Ok(Kernel { origin, ..cut })
    }

    /// Per-channel quadrature norm of `self − other`, summed over channels.
    pub fn distance(&self, other: &Kernel) -> Result<f64> {
        let d = self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))?;
        Ok(d.norm_sum())
    }

    /// Weighted sums `Σ w |G|² · f(modes)` over all channels and tuples.
    fn weighted_sum(&self, f: impl Fn(&[&Mode]) -> f64) -> f64 {
        let table = &self.table;
        let mut total = 0.0;
        for t in &self.tensors {
            let ranges: Vec<_> = t.sectors.iter().map(|&s| table.sector_range(s)).collect();
            let mut flat = 0;
            let mut modes = Vec::with_capacity(4);
            for_each_index(&t.dims, |idx| {
                let g = t.data[flat].norm_sqr();
                flat += 1;
                if g == 0.0 {
                    return;
                }
                modes.clear();
                modes.extend(idx.iter().zip(&ranges).map(|(&i, r)| table.mode(r.start + i)));
                let w: f64 = modes.iter().map(|m| m.weight).product();
                total += w * g * f(&modes);
            });
        }
        total
    }

    /// Discretised infrared integrability sum over tuples with `Σ|p_j|² ≤ 1`:
    /// `Σ w |G|² (1/|p₂|² + 1/|p₃|²)`.
    pub fn infrared_diagnostic(&self) -> f64 {
        self.weighted_sum(|m| {
            let r2: f64 = m.iter().map(|x| x.momentum_norm().powi(2)).sum();
            if r2 <= 1.0 {
                m[1].momentum_norm().powi(-2) + m[2].momentum_norm().powi(-2)
            } else {
                0.0
            }
        })
    }

    /// `Σ w |G|² / |p_j|²` over all tuples, for neutrino species `j ∈ {2, 3}`.
    pub fn infrared_integral(&self, species: Species) -> Result<f64> {
        let slot = match species.number() {
            2 => 1,
            3 => 2,
            n => return Err(Error::Domain(format!("infrared integral is defined for species 2 and 3, got {n}"))),
        };
        Ok(self.weighted_sum(|m| m[slot].momentum_norm().powi(-2)))
    }
}

/// `χ_Λ`: one on every channel where all four momenta satisfy `|p_j| ≤ Λ`.
pub fn sharp_cutoff_kernel(table: &ModeTable, lambda: f64) -> Result<Kernel> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("cutoff must be positive, got {lambda}")));
    }
    Ok(Kernel::from_fn(table, KernelOrigin::Sharp { lambda }, |_, m| {
        let inside = m.iter().all(|x| x.momentum_norm() <= lambda);
        Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
    }))
}

fn gaussian_value(m: &[&Mode], amplitude: f64, lambda: f64) -> Complex64 {
    let r2: f64 = m.iter().map(|x| norm3(x.momentum).powi(2)).sum();
    Complex64::new(amplitude * (-r2 / (lambda * lambda)).exp(), 0.0)
}

/// Mollified cutoff `A · exp(-Σ|p_j|²/Λ²)` on both channels.
pub fn smooth_gaussian_kernel(table: &ModeTable, amplitude: f64, lambda: f64) -> Result<Kernel> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("cutoff must be positive, got {lambda}")));
    }
    Ok(Kernel::from_fn(table, KernelOrigin::Gaussian { amplitude, lambda }, |_, m| {
        gaussian_value(m, amplitude, lambda)
    }))
}

/// Single-channel kernel for the quark-decay interaction: `J` fills the
/// `(+,−)` channel, indexed over sectors `(1,+)`, `(2,−)`, `(3,+)`, `(4,+)`
/// with the last index fastest.
pub fn quark_decay_kernel(table: &ModeTable, j: &[Complex64]) -> Result<Kernel> {
    let ch = Channel::PlusMinus;
    let expected: usize = ch.sectors().iter().map(|&s| table.sector_len(s)).product();
    if j.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: j.len() });
    }
    let mut k = Kernel::zeros(table);
    k.tensors[ch.index()].data.copy_from_slice(j);
    k.refresh_norms();
    Ok(k)
}

/// Quark-decay kernel with a Gaussian profile in the `(+,−)` channel only.
pub fn quark_decay_gaussian(table: &ModeTable, amplitude: f64, lambda: f64) -> Result<Kernel> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("cutoff must be positive, got {lambda}")));
    }
    Ok(Kernel::from_fn(table, KernelOrigin::Gaussian { amplitude, lambda }, |ch, m| {
        if ch == Channel::PlusMinus {
            gaussian_value(m, amplitude, lambda)
        } else {
            ZERO
        }
    }))
}

/// Kernel with independent standard complex Gaussian entries.
pub fn random_kernel<R: Rng + ?Sized>(table: &ModeTable, rng: &mut R) -> Kernel {
    Kernel::from_fn(table, KernelOrigin::User, |_, _| complex_gaussian(rng))
}

/// Three-slot kernels of the auxiliary cubic operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReducedForm {
    /// Slots `(1,ε)`, `(2,ε′)`, `(3,ε)`; operator `Σ conj(H) b₃ b₂ b₁`.
    Leptons123,
    /// Slots `(1,ε)`, `(3,ε′)`, `(4,ε)`; operator `Σ G b₁* b₃* b₄`.
    Without2,
    /// Slots `(1,ε)`, `(2,ε′)`, `(4,ε)`; operator `Σ G b₁* b₂* b₄`.
    Without3,
}

impl ReducedForm {
    pub fn sectors(self, ch: Channel) -> [Sector; 3] {
        let (e, ep) = (ch.eps(), ch.eps_prime());
        match self {
            ReducedForm::Leptons123 => [
                Sector::new(Species::ONE, e),
                Sector::new(Species::TWO, ep),
                Sector::new(Species::THREE, e),
            ],
            ReducedForm::Without2 => [
                Sector::new(Species::ONE, e),
                Sector::new(Species::THREE, ep),
                Sector::new(Species::FOUR, e),
            ],
            ReducedForm::Without3 => [
                Sector::new(Species::ONE, e),
                Sector::new(Species::TWO, ep),
                Sector::new(Species::FOUR, e),
            ],
        }
    }
}

/// Three-slot kernel, one tensor per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedKernel {
    form: ReducedForm,
    table: ModeTable,
    tensors: [ChannelTensor; 2],
}

impl ReducedKernel {
    pub fn from_fn(
        table: &ModeTable,
        form: ReducedForm,
        mut f: impl FnMut(Channel, &[&Mode]) -> Complex64,
    ) -> Self {
        let tensors =
            Channel::ALL.map(|ch| ChannelTensor::from_fn(table, ch, form.sectors(ch).to_vec(), |m| f(ch, m)));
        ReducedKernel { form, table: table.clone(), tensors }
    }

    pub fn random<R: Rng + ?Sized>(table: &ModeTable, form: ReducedForm, rng: &mut R) -> Self {
        Self::from_fn(table, form, |_, _| complex_gaussian(rng))
    }

    pub fn form(&self) -> ReducedForm {
        self.form
    }

    pub fn table(&self) -> &ModeTable {
        &self.table
    }

    pub fn matches_table(&self, table: &ModeTable) -> bool {
        tables_match(&self.table, table)
    }

    pub fn tensor(&self, ch: Channel) -> &ChannelTensor {
        &self.tensors[ch.index()]
    }

    pub fn norm(&self, ch: Channel) -> f64 {
        self.tensor(ch).l2_norm
    }

    pub fn norm_cache_defect(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| (t.l2_norm - t.compute_norm(&self.table)).abs())
            .fold(0.0, f64::max)
    }
}
