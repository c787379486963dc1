use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Compressed sparse row matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCsr {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::Dimension {
                expected: nrows + 1,
                found: row_offsets.len(),
            });
        }
        if row_offsets[0] != 0 || row_offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("row offsets must start at 0 and be non-decreasing".into()));
        }
        let nnz = row_offsets[nrows];
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(Error::Dimension {
                expected: nnz,
                found: col_indices.len().min(values.len()),
            });
        }
        for i in 0..nrows {
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if cols.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Argument(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::Argument(format!("column index out of range in row {i}")));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Sums duplicate entries; explicit zeros are kept.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = triplets.to_vec();
        if let Some(&(r, c, _)) = t.iter().find(|&&(r, c, _)| r >= nrows || c >= ncols) {
            return Err(Error::Argument(format!("triplet ({r}, {c}) out of range")));
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Zero-valued matrix with the given per-row column sets (sorted and deduplicated here).
    pub fn from_pattern(nrows: usize, ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), nrows);
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_indices.extend_from_slice(r);
            row_offsets.push(col_indices.len());
        }
        let nnz = col_indices.len();
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values: vec![0.0; nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Drops exact zeros of a dense matrix.
    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                if dense[(i, j)] != 0.0 {
                    t.push((i, j, dense[(i, j)]));
                }
            }
        }
        Self::from_triplets(dense.nrows(), dense.ncols(), &t).expect("in range")
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[a..b], &self.values[a..b])
    }

    /// Position of entry `(i, j)` in the value array, if stored.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[a..b].binary_search(&j).ok().map(|k| a + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to a stored entry; panics if `(i, j)` is not in the pattern.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Dimension {
                expected: self.ncols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer; sizes must conform.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut s = 0.0;
            for k in a..b {
                s += self.values[k] * x[self.col_indices[k]];
            }
            *yi = s;
        }
    }

    /// `r = f - A u`.
    pub fn residual_into(&self, f: &[f64], u: &[f64], r: &mut [f64]) {
        debug_assert_eq!(f.len(), self.nrows);
        for (i, ri) in r.iter_mut().enumerate() {
            let (a, b) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut s = f[i];
            for k in a..b {
                s -= self.values[k] * u[self.col_indices[k]];
            }
            *ri = s;
        }
    }

    pub fn residual(&self, f: &[f64], u: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.nrows];
        self.residual_into(f, u, &mut r);
        r
    }

    /// `y = Aᵀ x`.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::Dimension {
                expected: self.nrows,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let k = next[j];
                col_indices[k] = i;
                values[k] = v;
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Sparse product `A B` (Gustavson).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension {
                expected: self.ncols,
                found: other.nrows,
            });
        }
        let mut acc = vec![0.0; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut row_offsets = vec![0usize];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (ac, av) = self.row(i);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k);
                for (&j, &b) in bc.iter().zip(bv) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(acc[j]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// `diag(d) A`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                out.values[k] *= d[i];
            }
        }
        out
    }

    /// Main diagonal (zero where not stored).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Sum over rows of the distance from the first stored column to the diagonal.
    pub fn profile(&self) -> usize {
        (0..self.nrows)
            .map(|i| self.row(i).0.first().map_or(0, |&j| i.saturating_sub(j)))
            .sum()
    }

    /// `P A Pᵀ` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<Self> {
        if self.nrows != self.ncols || perm.len() != self.nrows {
            return Err(Error::Dimension {
                expected: self.nrows,
                found: perm.len(),
            });
        }
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &old in perm {
            buf.clear();
            let (cols, vals) = self.row(old);
            buf.extend(cols.iter().zip(vals).map(|(&j, &v)| (inv[j], v)));
            buf.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &buf {
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Entrywise `self + alpha * other` on the union pattern.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Dimension {
                expected: self.nrows,
                found: other.nrows,
            });
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, x)));
            let (c, v) = other.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, alpha * x)));
        }
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Stores the rows of a symmetric sparsity pattern `A + Aᵀ` without values.
    pub(crate) fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nrows];
        for i in 0..self.nrows {
            for &j in self.row(i).0 {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}
