//! Closed-form commutators with the dilation generator.
//!
//! Writing `U(θ)` for the second-quantised dilation `p ↦ e^θ p`, the
//! commutators are the `θ`-derivatives at zero of `U(θ) H U(θ)*`. No
//! discretised generator is ever formed on the Fock space.

use crate::error::Result;
use crate::fock::{diagonal_operator, FockBasis, Species};
use crate::model::{assemble_hi, Kernel, PhysicalParams};
use crate::sparse::SparseOperator;

fn one_particle_diagonal(basis: &FockBasis, f: impl Fn(Species, f64) -> f64) -> SparseOperator {
    let table = basis.table();
    let vals: Vec<f64> = table
        .modes()
        .iter()
        .map(|m| f(m.sector.species, m.momentum_norm()))
        .collect();
    diagonal_operator(basis, |bits| crate::model::assemble::occupied_sum(bits, &vals))
}

/// `[A, H₀]`: each occupied mode contributes `p²/ω(p)` (species 1, 4) or `|p|` (species 2, 3).
pub fn commutator_a_h0(basis: &FockBasis, params: &PhysicalParams) -> SparseOperator {
    one_particle_diagonal(basis, |sp, p| {
        let m = params.mass(sp);
        if m == 0.0 {
            p
        } else {
            p * p / p.hypot(m)
        }
    })
}

/// `[A, H_I]` from the dilation kernel `aG = Σ_j a_j G`.
pub fn commutator_a_hi(basis: &FockBasis, ag: &Kernel) -> Result<SparseOperator> {
    assemble_hi(basis, ag)
}

/// Double commutator with the symbol `p²m²/ω³` for species 1 and 4 and
/// `|p|` for species 2 and 3.
pub fn double_commutator_a_a_h0(basis: &FockBasis, params: &PhysicalParams) -> SparseOperator {
    one_particle_diagonal(basis, |sp, p| {
        let m = params.mass(sp);
        if m == 0.0 {
            p
        } else {
            p * p * m * m / p.hypot(m).powi(3)
        }
    })
}

/// Second dilation derivative of the dispersion, `(p·∇)²ω = p²(p² + 2m²)/ω³`
/// for the massive species and `|p|` for the neutrinos.
pub fn second_dilation_derivative_h0(basis: &FockBasis, params: &PhysicalParams) -> SparseOperator {
    one_particle_diagonal(basis, |sp, p| {
        let m = params.mass(sp);
        if m == 0.0 {
            p
        } else {
            p * p * (p * p + 2.0 * m * m) / p.hypot(m).powi(3)
        }
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    /// One-particle radial problem on a uniform grid: the antisymmetric
    /// discretisation `K = ½(x D + D x)` of the symmetrised dilation, commuted
    /// with multiplication by `ω`, acts on smooth functions as `x ω′(x)`.
    #[test]
    fn discrete_dilation_commutator_converges_to_closed_form() {
        let m = 1.0f64;
        let omega = |x: f64| x.hypot(m);
        let closed = |x: f64| x * x / x.hypot(m);
        let err = |n: usize| {
            let (a, b) = (0.5, 2.5);
            let h = (b - a) / (n - 1) as f64;
            let x: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
            let mut k = DMatrix::<f64>::zeros(n, n);
            for i in 0..n - 1 {
                let v = 0.5 * (x[i] + x[i + 1]) / (2.0 * h);
                k[(i, i + 1)] = v;
                k[(i + 1, i)] = -v;
            }
            assert_eq!(k.transpose(), -&k);
            let w = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, x.iter().map(|&t| omega(t))));
            let c = &k * &w - &w * &k;
            let f = nalgebra::DVector::from_iterator(n, x.iter().map(|&t| (-(t - 1.5).powi(2) * 4.0).exp()));
            let cf = &c * &f;
            (n / 4..3 * n / 4).map(|i| (cf[i] - closed(x[i]) * f[i]).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(81), err(161));
        assert!(e2 < e1 && e1 / e2 > 3.0, "{e1:e} {e2:e}");
        assert!(e2 < 1e-3);
    }
}
