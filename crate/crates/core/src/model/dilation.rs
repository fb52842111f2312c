//! Dilation derivatives of kernels.
//!
//! The one-particle dilation acts on a function of `p` as
//! `a f = p·∇f + (3/2) f`, the symmetrised form of `p·∇`. For a kernel the
//! relevant object is `Σ_j a_j G`, one term per slot. Gaussian kernels get the
//! closed form; tabulated kernels are differentiated radially along rays of
//! grid nodes; sharp cutoffs have no derivative in `L²` and are refused.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ModeTable, Sector};
use crate::model::kernel::{for_each_index, Kernel, KernelOrigin};
use crate::model::params::norm3;

/// Finite-difference weights for derivatives `0..=m` at `z` on nodes `x`
/// (Fornberg's recursion). Returns `c[d][j]`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Per-mode radial stencils within one sector: `stencil[k] = [(l, weight)]`
/// such that `Σ weight · f(l)` approximates a radial operator at mode `k`.
type Stencils = Vec<Vec<(usize, f64)>>;

/// Groups the sector's modes into rays (same spin, same direction), sorted by radius.
fn rays(table: &ModeTable, sector: Sector) -> Vec<Vec<(usize, f64)>> {
    // key: spin and direction, both quantised
    type RayKey = (i64, [i64; 3]);
    let range = table.sector_range(sector);
    let mut groups: BTreeMap<RayKey, Vec<(usize, f64)>> = BTreeMap::new();
    for (local, k) in range.enumerate() {
        let m = table.mode(k);
        let r = norm3(m.momentum);
        let dir = m.momentum.map(|x| (x / r * 1e9).round() as i64);
        groups.entry(((2.0 * m.spin.value()) as i64, dir)).or_default().push((local, r));
    }
    groups
        .into_values()
        .map(|mut v| {
            v.sort_by(|a, b| a.1.total_cmp(&b.1));
            v
        })
        .collect()
}

/// Radial stencils for `r ∂_r` (order 1) or `r² Δ_radial = r² (∂_r² + (2/r) ∂_r)`
/// (order 2), using up to three neighbouring nodes on each ray.
fn radial_stencils(table: &ModeTable, sector: Sector, order: usize) -> Result<Stencils> {
    let n = table.sector_len(sector);
    let mut out: Stencils = vec![Vec::new(); n];
    for ray in rays(table, sector) {
        if ray.len() < order + 1 {
            return Err(Error::NotDifferentiable(format!(
                "sector {sector} has a ray with {} node(s); order-{order} radial differences need at least {}",
                ray.len(),
                order + 1
            )));
        }
        for (pos, &(local, r)) in ray.iter().enumerate() {
            let width = (order + 1).max(3).min(ray.len());
            let start = pos.saturating_sub(width / 2).min(ray.len() - width);
            let nodes = &ray[start..start + width];
            let xs: Vec<f64> = nodes.iter().map(|x| x.1).collect();
            let c = fd_weights(r, &xs, order);
            out[local] = nodes
                .iter()
                .enumerate()
                .map(|(i, &(l, _))| {
                    let w = if order == 1 { r * c[1][i] } else { r * r * c[2][i] + 2.0 * r * c[1][i] };
                    (l, w)
                })
                .collect();
        }
    }
    Ok(out)
}

/// Applies a per-slot stencil to every channel tensor. `stencil_for(slot, sector)`
/// supplies the stencil of that slot; slots returning `None` are skipped.
fn apply_slot_stencils(
    g: &Kernel,
    stencil_for: impl Fn(usize, Sector) -> Result<Option<Stencils>>,
) -> Result<Vec<Vec<Complex64>>> {
    let mut out = Vec::with_capacity(2);
    for t in g.tensors() {
        let dims = t.dims().to_vec();
        let mut acc = vec![Complex64::new(0.0, 0.0); t.data().len()];
        for (slot, &sector) in t.sectors().iter().enumerate() {
            let Some(st) = stencil_for(slot, sector)? else { continue };
            let mut flat = 0;
            let mut src = vec![0usize; dims.len()];
            for_each_index(&dims, |idx| {
                src.copy_from_slice(idx);
                let mut v = Complex64::new(0.0, 0.0);
                for &(l, w) in &st[idx[slot]] {
                    src[slot] = l;
                    v += t.get(&src) * w;
                }
                acc[flat] += v;
                flat += 1;
            });
        }
        out.push(acc);
    }
    Ok(out)
}

fn refuse_sharp(origin: &KernelOrigin) -> Result<&KernelOrigin> {
    match origin {
        KernelOrigin::Sharp { lambda } => Err(Error::NotDifferentiable(format!(
            "sharp cutoff at {lambda} has a jump along dilations; use a smooth kernel"
        ))),
        KernelOrigin::InfraredCut { sigma, zeroed, .. } if *zeroed > 0 => Err(Error::NotDifferentiable(format!(
            "infrared cut at sigma = {sigma} removed {zeroed} entries and introduced a jump"
        ))),
        KernelOrigin::InfraredCut { parent, .. } => refuse_sharp(parent),
        other => Ok(other),
    }
}

/// `Σ_j a_j G` with the representation chosen from the kernel's origin.
pub fn dilation_kernel(g: &Kernel) -> Result<Kernel> {
    match refuse_sharp(g.origin())? {
        KernelOrigin::Gaussian { lambda, .. } => Ok(dilation_kernel_gaussian(g, *lambda)),
        _ => dilation_kernel_fd(g),
    }
}

/// Closed form for Gaussian profiles: `Σ_j a_j G = (6 − 2 Σ_j |p_j|²/Λ²) G`.
pub fn dilation_kernel_gaussian(g: &Kernel, lambda: f64) -> Kernel {
    g.map_entries(KernelOrigin::User, |_, m, z| {
        let r2: f64 = m.iter().map(|x| x.momentum_norm().powi(2)).sum();
        z * (6.0 - 2.0 * r2 / (lambda * lambda))
    })
}

/// Radial finite differences along rays of grid nodes. Correct for kernels
/// whose angular dependence is absent along each ray direction, i.e. the
/// derivative taken is `|p| ∂_{|p|}` at fixed direction and spin.
pub fn dilation_kernel_fd(g: &Kernel) -> Result<Kernel> {
    refuse_sharp(g.origin())?;
    let table = g.table();
    let derivs = apply_slot_stencils(g, |_, sector| radial_stencils(table, sector, 1).map(Some))?;
    Ok(g.zip_data(&derivs, |d, z| d + z * 6.0))
}

/// Discrete norms of the dilation and radial-Laplacian derivatives of a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct Regularity {
    /// `Σ_ch ‖Σ_j p_j·∇_j G‖`.
    pub dilation_norm: f64,
    /// `Σ_ch ‖|p_j|² Δ_j G‖` for each slot `j`.
    pub laplacian_norms: [f64; 4],
}

impl Regularity {
    pub fn is_finite(&self) -> bool {
        self.dilation_norm.is_finite() && self.laplacian_norms.iter().all(|x| x.is_finite())
    }
}

/// Finite-difference regularity diagnostics. Requires at least three nodes on
/// every ray; Gaussian kernels use the closed forms instead.
pub fn regularity(g: &Kernel) -> Result<Regularity> {
    let origin = refuse_sharp(g.origin())?.clone();
    let table = g.table();
    if let KernelOrigin::Gaussian { lambda, .. } = origin {
        let l2 = lambda * lambda;
        let dil = g.map_entries(KernelOrigin::User, |_, m, z| {
            let r2: f64 = m.iter().map(|x| x.momentum_norm().powi(2)).sum();
            z * (-2.0 * r2 / l2)
        });
        let mut lap = [0.0; 4];
        for (j, slot) in lap.iter_mut().enumerate() {
            let k = g.map_entries(KernelOrigin::User, |_, m, z| {
                let r2 = m[j].momentum_norm().powi(2);
                z * r2 * (4.0 * r2 / (l2 * l2) - 6.0 / l2)
            });
            *slot = k.norm_sum();
        }
        return Ok(Regularity { dilation_norm: dil.norm_sum(), laplacian_norms: lap });
    }
    let dil = apply_slot_stencils(g, |_, sector| radial_stencils(table, sector, 1).map(Some))?;
    let dilation_norm = g.zip_data(&dil, |d, _| d).norm_sum();
    let mut lap = [0.0; 4];
    for (j, slot) in lap.iter_mut().enumerate() {
        let d = apply_slot_stencils(g, |s, sector| {
            if s == j {
                radial_stencils(table, sector, 2).map(Some)
            } else {
                Ok(None)
            }
        })?;
        *slot = g.zip_data(&d, |d, _| d).norm_sum();
    }
    Ok(Regularity { dilation_norm, laplacian_norms: lap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_mode_table, GridNode, GridSpec, Species, SpeciesGrid, Spin};
    use crate::model::kernel::{sharp_cutoff_kernel, smooth_gaussian_kernel, Channel};

    /// `n` nodes spaced by `h` along the z axis, centred on |p| = 0.6.
    fn ray_table(n: usize, h: f64) -> ModeTable {
        let start = 0.6 - h * (n / 2) as f64;
        let species = Species::ALL
            .iter()
            .map(|&sp| SpeciesGrid {
                nodes: (0..n).map(|i| GridNode { momentum: [0.0, 0.0, start + h * i as f64], weight: h }).collect(),
                spins: vec![Spin::all_for(sp)[1].value()],
            })
            .collect();
        build_mode_table(&GridSpec { species }).unwrap()
    }

    #[test]
    fn fornberg_reproduces_central_difference() {
        let c = fd_weights(0.0, &[-0.5, 0.0, 0.5], 2);
        assert_eq!(c[1], vec![-1.0, 0.0, 1.0]);
        assert_eq!(c[2], vec![4.0, -8.0, 4.0]);
    }

    fn fd_error(n: usize, h: f64) -> f64 {
        let t = ray_table(n, h);
        let g = smooth_gaussian_kernel(&t, 1.0, 1.5).unwrap();
        let exact = dilation_kernel_gaussian(&g, 1.5);
        let fd = dilation_kernel_fd(&g).unwrap();
        // error at the centre node of every slot
        let mid = n / 2;
        let idx = [mid; 4];
        Channel::ALL
            .iter()
            .map(|&ch| (exact.tensor(ch).get(&idx) - fd.tensor(ch).get(&idx)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_closed_form_matches_differences_to_second_order() {
        let e1 = fd_error(5, 0.1);
        let e2 = fd_error(7, 0.05);
        let ratio = e1 / e2;
        assert!(ratio > 3.0 && ratio < 5.0, "errors {e1:e} -> {e2:e}, ratio {ratio}");
    }

    #[test]
    fn sharp_and_cut_kernels_are_refused() {
        let t = ray_table(3, 0.2);
        let s = sharp_cutoff_kernel(&t, 1.0).unwrap();
        assert!(matches!(dilation_kernel(&s), Err(Error::NotDifferentiable(_))));
        let g = smooth_gaussian_kernel(&t, 1.0, 1.0).unwrap();
        assert!(dilation_kernel(&g.infrared_cutoff(0.1).unwrap()).is_ok());
        assert!(matches!(dilation_kernel(&g.infrared_cutoff(0.5).unwrap()), Err(Error::NotDifferentiable(_))));
    }

    #[test]
    fn single_node_rays_cannot_be_differentiated() {
        let t = ray_table(1, 0.2);
        let g = smooth_gaussian_kernel(&t, 1.0, 1.0).unwrap().scale(num_complex::Complex64::new(0.0, 1.0));
        assert!(matches!(dilation_kernel(&g), Err(Error::NotDifferentiable(_))));
    }

    #[test]
    fn gaussian_regularity_is_finite_and_matches_differences() {
        let t = ray_table(7, 0.05);
        let g = smooth_gaussian_kernel(&t, 1.0, 1.5).unwrap();
        let exact = regularity(&g).unwrap();
        assert!(exact.is_finite());
        let user = g.scale(num_complex::Complex64::new(0.0, 1.0));
        let fd = regularity(&user).unwrap();
        assert!((exact.dilation_norm - fd.dilation_norm).abs() < 0.05 * exact.dilation_norm);
        for j in 0..4 {
            let (a, b) = (exact.laplacian_norms[j], fd.laplacian_norms[j]);
            assert!((a - b).abs() < 0.05 * a, "slot {j}: {a} vs {b}");
        }
    }
}
