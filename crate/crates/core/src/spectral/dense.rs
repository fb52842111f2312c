//! Block-dense diagonalisation and spectral windows.
//!
//! Operators are split into the connected components of their sparsity
//! pattern. Each block is diagonalised densely, which keeps windows exact at
//! the sizes where a conserved charge splits the Hamiltonian finely.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Largest block the dense eigensolver accepts.
pub const MAX_DENSE_BLOCK: usize = 4096;

/// Eigen-decomposition of one block.
#[derive(Clone, Debug)]
pub struct Block {
    /// Global basis indices of the block, ascending.
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]` in block coordinates.
    pub eigenvectors: DMatrix<Complex64>,
}

/// Full spectrum of a Hermitian operator, block by block.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    pub dim: usize,
    pub blocks: Vec<Block>,
}

pub fn hermitian_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

impl BlockSpectrum {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        Self::with_components(h, SparseOperator::joint_components(&[h]))
    }

    pub fn with_components(h: &SparseOperator, components: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks = Vec::with_capacity(components.len());
        for indices in components {
            if indices.len() > MAX_DENSE_BLOCK {
                return Err(Error::Resource(format!(
                    "coupled block of size {} exceeds the dense limit of {MAX_DENSE_BLOCK}",
                    indices.len()
                )));
            }
            let (eigenvalues, eigenvectors) = if indices.len() == 1 {
                (vec![h.get(indices[0], indices[0]).re], DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)))
            } else {
                hermitian_eigen(h.principal_submatrix(&indices))
            };
            blocks.push(Block { indices, eigenvalues, eigenvectors });
        }
        Ok(BlockSpectrum { dim: h.dim(), blocks })
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Lowest eigenvalue with a global eigenvector.
    pub fn lowest(&self) -> (f64, Vec<Complex64>) {
        let (bi, ei) = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(bi, b)| b.eigenvalues.iter().enumerate().map(move |(ei, &e)| (bi, ei, e)))
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .map(|(bi, ei, _)| (bi, ei))
            .expect("nonempty spectrum");
        let b = &self.blocks[bi];
        (b.eigenvalues[ei], self.global_vector(b, ei))
    }

    fn global_vector(&self, b: &Block, col: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
        for (r, &i) in b.indices.iter().enumerate() {
            v[i] = b.eigenvectors[(r, col)];
        }
        v
    }

    /// Eigenvectors with eigenvalue in `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> SpectralWindow {
        let mut energies = Vec::new();
        let mut vectors = Vec::new();
        for blk in &self.blocks {
            for (i, &e) in blk.eigenvalues.iter().enumerate() {
                if e >= a && e <= b {
                    energies.push(e);
                    vectors.push((blk.indices.clone(), blk.eigenvectors.column(i).into_owned()));
                }
            }
        }
        SpectralWindow { dim: self.dim, energies, vectors }
    }
}

/// Orthonormal eigenvectors spanning the range of a spectral projection.
#[derive(Clone, Debug)]
pub struct SpectralWindow {
    dim: usize,
    pub energies: Vec<f64>,
    /// Each vector as (support indices, values on the support).
    vectors: Vec<(Vec<usize>, DVector<Complex64>)>,
}

impl SpectralWindow {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        let (idx, vals) = &self.vectors[i];
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
        for (&k, &x) in idx.iter().zip(vals.iter()) {
            v[k] = x;
        }
        v
    }

    /// `E_Δ = Σ v v*` as a sparse operator.
    pub fn projector(&self) -> SparseOperator {
        let mut triplets = Vec::new();
        for (idx, vals) in &self.vectors {
            for (&r, &x) in idx.iter().zip(vals.iter()) {
                for (&c, &y) in idx.iter().zip(vals.iter()) {
                    triplets.push((r, c, x * y.conj()));
                }
            }
        }
        SparseOperator::from_triplets(self.dim, triplets)
    }

    /// `V* C V` for the window vectors `V`.
    pub fn compress(&self, c: &SparseOperator) -> DMatrix<Complex64> {
        let d = self.len();
        let cols: Vec<Vec<Complex64>> = (0..d).map(|j| c.apply(&self.vector(j))).collect();
        let mut m = DMatrix::zeros(d, d);
        for (i, (idx, vals)) in self.vectors.iter().enumerate() {
            for (j, cv) in cols.iter().enumerate() {
                m[(i, j)] = idx.iter().zip(vals.iter()).map(|(&k, x)| x.conj() * cv[k]).sum();
            }
        }
        // symmetrise away rounding
        let mt = m.adjoint();
        (m + mt) * Complex64::new(0.5, 0.0)
    }
}

/// Projector onto the eigenvectors of `h` with eigenvalue in `[a, b]`, and its rank.
pub fn spectral_window(h: &SparseOperator, interval: (f64, f64)) -> Result<(SparseOperator, usize)> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::Domain(format!("window needs a < b, got [{a}, {b}]")));
    }
    let w = BlockSpectrum::new(h)?.window(a, b);
    Ok((w.projector(), w.len()))
}

/// Lowest eigenpair by dense diagonalisation; the oracle for the iterative solver.
pub fn dense_ground_state(h: &SparseOperator) -> Result<(f64, Vec<Complex64>)> {
    Ok(BlockSpectrum::new(h)?.lowest())
}
