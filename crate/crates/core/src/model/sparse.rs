use nalgebra::DMatrix;
use num_complex::Complex64;

/// Real square matrix in compressed-sparse-row layout.
///
/// Every operator the model needs is real in the product basis, so values
/// are stored as `f64` and applied to complex state vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assembles from (row, col, value) triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), col_idx.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col_idx.push(c);
            values.push(v);
        }
        let mut kept_cols = Vec::with_capacity(col_idx.len());
        let mut kept_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                kept_cols.push(c);
                kept_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            dim,
            row_ptr,
            col_idx: kept_cols,
            values: kept_vals,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.values[i]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(i) => self.values[range.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Largest |a_ij − a_ji| over all stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest absolute entry (max-norm).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Gershgorin-style bound on the spectral radius: max row sum of |a_ij|.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.values[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (r, c, s * v)).collect())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseMatrix, s: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t: Vec<_> = self.entries().collect();
        t.extend(other.entries().map(|(r, c, v)| (r, c, s * v)));
        Self::from_triplets(self.dim, t)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        for (r, k, a) in self.entries() {
            for i in other.row_ptr[k]..other.row_ptr[k + 1] {
                t.push((r, other.col_idx[i], a * other.values[i]));
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// Largest |a_ij − b_ij| over the union of sparsity patterns.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        self.add_scaled(other, -1.0).max_abs()
    }

    /// y = A x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.col_idx[i]] * self.values[i];
            }
            *out = acc;
        }
    }

    /// y = A x for real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.col_idx[i]] * self.values[i];
            }
            *out = acc;
        }
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim {
            let mut row = Complex64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += psi[self.col_idx[i]] * self.values[i];
            }
            acc += psi[r].conj() * row;
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}
