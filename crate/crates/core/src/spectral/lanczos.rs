//! Restarted Lanczos for the lowest eigenpair of a sparse Hermitian operator.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::random::{random_state, seeded};
use crate::sparse::{dot, norm, SparseOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Target for the residual `‖(H − E)φ‖`.
    pub tol: f64,
    /// Seed of the random start vector.
    pub seed: u64,
    /// Krylov space size per restart cycle.
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, seed: 0, krylov_dim: 100, max_restarts: 400 }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions { tol, ..Self::default() }
    }
}

/// Lowest eigenpair found by the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub energy: f64,
    /// Unit-norm eigenvector in basis coordinates.
    pub vector: Vec<Complex64>,
    pub residual: f64,
    /// Total matrix-vector products.
    pub iterations: usize,
}

pub fn residual(h: &SparseOperator, energy: f64, v: &[Complex64]) -> f64 {
    let hv = h.apply(v);
    let r: Vec<Complex64> = hv.iter().zip(v).map(|(a, b)| a - b * energy).collect();
    norm(&r)
}

/// Lowest eigenvalue and eigenvector of a Hermitian operator.
///
/// The operator is split into the connected components of its sparsity
/// pattern. One-state blocks are read off exactly and larger blocks run a
/// Lanczos iteration with full reorthogonalisation from a seeded random start,
/// restarted from the current Ritz vector until the block residual reaches
/// `opts.tol`. The lowest block wins, the first one on ties, so the free
/// Hamiltonian returns the vacuum.
pub fn ground_state(h: &SparseOperator, opts: &SolverOptions) -> Result<SpectralReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("solver tolerance must be positive, got {}", opts.tol)));
    }
    let n = h.dim();
    if n == 0 {
        return Err(Error::Domain("operator has dimension 0".into()));
    }
    let comps = SparseOperator::joint_components(&[h]);
    let solved: Vec<Result<SpectralReport>> = comps
        .par_iter()
        .enumerate()
        .map(|(ci, idx)| {
            if idx.len() == 1 {
                let e = h.get(idx[0], idx[0]).re;
                return Ok(SpectralReport { energy: e, vector: vec![Complex64::new(1.0, 0.0)], residual: 0.0, iterations: 0 });
            }
            let seed = opts.seed ^ (ci as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            lanczos_block(&h.submatrix(idx), opts, seed)
        })
        .collect();

    let mut iterations = 0;
    let mut worst = 0.0f64;
    let mut failed = false;
    let mut best: Option<(usize, SpectralReport)> = None;
    for (ci, r) in solved.into_iter().enumerate() {
        match r {
            Ok(rep) => {
                iterations += rep.iterations;
                worst = worst.max(rep.residual);
                if best.as_ref().is_none_or(|(_, b)| rep.energy < b.energy) {
                    best = Some((ci, rep));
                }
            }
            Err(Error::Solver { iterations: it, best_residual }) => {
                iterations += it;
                worst = worst.max(best_residual);
                failed = true;
            }
            Err(e) => return Err(e),
        }
    }
    if failed {
        return Err(Error::Solver { iterations, best_residual: worst });
    }
    let (ci, rep) = best.expect("at least one block");
    let mut vector = vec![Complex64::new(0.0, 0.0); n];
    for (&i, &x) in comps[ci].iter().zip(&rep.vector) {
        vector[i] = x;
    }
    Ok(SpectralReport { energy: rep.energy, vector, residual: rep.residual, iterations })
}

fn lanczos_block(h: &SparseOperator, opts: &SolverOptions, seed: u64) -> Result<SpectralReport> {
    let n = h.dim();
    let m = opts.krylov_dim.clamp(2, n);
    let mut v = random_state(&mut seeded(seed), n);
    let mut best: Option<SpectralReport> = None;
    let mut matvecs = 0;
    for _ in 0..=opts.max_restarts {
        let (energy, x, used) = lanczos_cycle(h, &v, m);
        matvecs += used + 1;
        let res = residual(h, energy, &x);
        if best.as_ref().is_none_or(|b| res < b.residual) {
            best = Some(SpectralReport { energy, vector: x.clone(), residual: res, iterations: matvecs });
        }
        if res <= opts.tol {
            let mut report = best.expect("set above");
            report.iterations = matvecs;
            return Ok(report);
        }
        v = x;
    }
    Err(Error::Solver {
        iterations: matvecs,
        best_residual: best.map_or(f64::INFINITY, |b| b.residual),
    })
}

/// One Lanczos cycle of at most `m` steps. Returns the lowest Ritz value,
/// its normalised Ritz vector and the number of products used.
fn lanczos_cycle(h: &SparseOperator, start: &[Complex64], m: usize) -> (f64, Vec<Complex64>, usize) {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut q = start.to_vec();
    let nq = norm(&q);
    q.iter_mut().for_each(|x| *x /= nq);
    let mut scale = 0.0f64;
    for j in 0..m {
        let mut w = h.apply(&q);
        let a = dot(&q, &w).re;
        alpha.push(a);
        basis.push(q);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= y * c);
            }
        }
        let bn = norm(&w);
        scale = scale.max(a.abs()).max(bn);
        if j + 1 == m || bn <= 1e-13 * scale.max(1.0) {
            break;
        }
        beta.push(bn);
        w.iter_mut().for_each(|x| *x /= bn);
        q = w;
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imin, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    let s = eig.eigenvectors.column(imin);
    let mut x = vec![Complex64::new(0.0, 0.0); h.dim()];
    for (b, &c) in basis.iter().zip(s.iter()) {
        x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += bi * c);
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|xi| *xi /= nx);
    (theta, x, k)
}
