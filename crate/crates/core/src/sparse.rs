//! Compressed sparse row operators over a Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex sparse matrix in CSR layout.
///
/// Column indices inside a row are strictly increasing and no stored value is
/// exactly zero. Operators are immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::zeros(diag.len());
        let mut nnz = 0;
        for (i, &d) in diag.iter().enumerate() {
            if d != 0.0 {
                op.cols.push(i);
                op.vals.push(Complex64::new(d, 0.0));
                nnz += 1;
            }
            op.row_ptr[i + 1] = nnz;
        }
        op
    }

    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed in input order; exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut op = Self::zeros(dim);
        let mut counts = vec![0usize; dim];
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) out of range for dim {dim}");
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != ZERO {
                op.cols.push(c);
                op.vals.push(v);
                counts[r] += 1;
            }
        }
        for (r, n) in counts.iter().enumerate() {
            op.row_ptr[r + 1] = op.row_ptr[r] + n;
        }
        op
    }

    /// Builds an operator from per-column entry lists `columns[c] = [(row, value)]`.
    pub fn from_columns(dim: usize, columns: Vec<Vec<(usize, Complex64)>>) -> Self {
        assert_eq!(columns.len(), dim);
        let triplets = columns
            .into_iter()
            .enumerate()
            .flat_map(|(c, entries)| entries.into_iter().map(move |(r, v)| (r, c, v)))
            .collect();
        Self::from_triplets(dim, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => ZERO,
        }
    }

    /// Matrix-vector product. Rows are independent, so the parallel schedule
    /// never changes the result.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "vector length does not match operator");
        (0..self.dim)
            .into_par_iter()
            .with_min_len(256)
            .map(|r| self.row(r).fold(ZERO, |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    /// `<x, A x>`.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        dot(x, &self.apply(x))
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let triplets = self.iter().map(|(r, c, v)| (r, c, v * factor)).collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        assert_eq!(self.dim, other.dim);
        let triplets = self
            .iter()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.iter().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let rows: Vec<Vec<(usize, Complex64)>> = (0..self.dim)
            .into_par_iter()
            .map(|r| {
                let mut acc: Vec<(usize, Complex64)> = Vec::new();
                for (k, a) in self.row(r) {
                    for (c, b) in other.row(k) {
                        acc.push((c, a * b));
                    }
                }
                acc.sort_by_key(|&(c, _)| c);
                let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(acc.len());
                for (c, v) in acc {
                    match merged.last_mut() {
                        Some((lc, lv)) if *lc == c => *lv += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged.retain(|&(_, v)| v != ZERO);
                merged
            })
            .collect();
        let mut op = Self::zeros(self.dim);
        for (r, entries) in rows.into_iter().enumerate() {
            op.row_ptr[r + 1] = op.row_ptr[r] + entries.len();
            for (c, v) in entries {
                op.cols.push(c);
                op.vals.push(v);
            }
        }
        op
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// `self * other + other * self`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.matmul(other).add(&other.matmul(self))
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|A(r,c) - conj(A(c,r))|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|A(r,c)|` over stored entries whose column satisfies `keep`.
    pub fn max_abs_in_columns(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.iter()
            .filter(|&(_, c, _)| keep(c))
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Dense copy of the principal submatrix on `indices` (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> DMatrix<Complex64> {
        let mut local = vec![usize::MAX; self.dim];
        for (i, &g) in indices.iter().enumerate() {
            local[g] = i;
        }
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (i, &g) in indices.iter().enumerate() {
            for (c, v) in self.row(g) {
                let j = local[c];
                if j != usize::MAX {
                    m[(i, j)] = v;
                }
            }
        }
        m
    }

    /// Sparse principal submatrix on the ascending index list `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> SparseOperator {
        let mut local = vec![usize::MAX; self.dim];
        for (i, &g) in indices.iter().enumerate() {
            local[g] = i;
        }
        let mut out = SparseOperator::zeros(indices.len());
        for (i, &g) in indices.iter().enumerate() {
            for (c, v) in self.row(g) {
                let j = local[c];
                if j != usize::MAX {
                    out.cols.push(j);
                    out.vals.push(v);
                }
            }
            out.row_ptr[i + 1] = out.cols.len();
        }
        out
    }

    /// Connected components of the (symmetrised) sparsity graph of every
    /// operator in `ops`. Any operator in `ops` is block diagonal over them.
    /// Components are returned sorted by their smallest index, each sorted.
    pub fn joint_components(ops: &[&SparseOperator]) -> Vec<Vec<usize>> {
        let dim = ops.first().map_or(0, |op| op.dim);
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for op in ops {
            assert_eq!(op.dim, dim);
            for (r, c, _) in op.iter() {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi] = lo;
                }
            }
        }
        let mut label = vec![usize::MAX; dim];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..dim {
            let root = find(&mut parent, i);
            if label[root] == usize::MAX {
                label[root] = comps.len();
                comps.push(Vec::new());
            }
            comps[label[root]].push(i);
        }
        comps
    }
}

/// `sum_i conj(a_i) b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let op = SparseOperator::from_triplets(
            3,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (2, 0, c(0.0, 2.0)), (2, 0, c(1.0, 0.0))],
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(2, 0), c(1.0, 2.0));
        assert_eq!(op.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseOperator::from_triplets(
            3,
            vec![(0, 1, c(1.0, 1.0)), (1, 2, c(2.0, 0.0)), (2, 0, c(0.0, -1.0)), (1, 1, c(3.0, 0.0))],
        );
        let b = a.adjoint();
        let sparse = a.matmul(&b).to_dense();
        let dense = a.to_dense() * b.to_dense();
        assert!((sparse - dense).norm() < 1e-14);
    }

    #[test]
    fn adjoint_of_product_is_hermitian() {
        let a = SparseOperator::from_triplets(2, vec![(0, 1, c(0.5, 2.0)), (1, 1, c(1.0, 0.0))]);
        assert!(a.matmul(&a.adjoint()).is_hermitian(1e-14));
        assert!(!a.is_hermitian(1e-3));
    }

    #[test]
    fn components_split_block_diagonal_pattern() {
        let a = SparseOperator::from_triplets(5, vec![(0, 3, c(1.0, 0.0)), (4, 2, c(1.0, 0.0))]);
        let comps = SparseOperator::joint_components(&[&a]);
        assert_eq!(comps, vec![vec![0, 3], vec![1], vec![2, 4]]);
    }
}
