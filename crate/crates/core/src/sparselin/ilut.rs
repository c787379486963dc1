use super::csr::SparseMatrixCsr;
use super::rcm::rcm_ordering;
use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Symmetric reordering applied before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    /// Natural (tensor) order.
    None,
    /// Reverse Cuthill–McKee.
    #[default]
    Rcm,
}

/// Dual-threshold incomplete factorization `P A Pᵀ ≈ L U`.
///
/// `L` is strictly lower triangular (unit diagonal implied); `U` is stored as its
/// strictly upper part plus a separate diagonal.
#[derive(Debug, Clone)]
pub struct IlutFactorization {
    l: SparseMatrixCsr,
    u: SparseMatrixCsr,
    u_diag: Vec<f64>,
    perm: Vec<usize>,
    perm_inverse: Vec<usize>,
    tau: f64,
    fillfactor: f64,
    max_fill: usize,
}

impl IlutFactorization {
    pub fn nrows(&self) -> usize {
        self.u_diag.len()
    }

    /// Strictly lower factor.
    pub fn l(&self) -> &SparseMatrixCsr {
        &self.l
    }

    /// Strictly upper part of `U`.
    pub fn u_strict(&self) -> &SparseMatrixCsr {
        &self.u
    }

    pub fn u_diagonal(&self) -> &[f64] {
        &self.u_diag
    }

    /// `perm[new] = old`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn perm_inverse(&self) -> &[usize] {
        &self.perm_inverse
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fillfactor(&self) -> f64 {
        self.fillfactor
    }

    /// Per-row cap `M` on off-diagonal entries of each factor.
    pub fn max_fill(&self) -> usize {
        self.max_fill
    }

    /// Stored entries of `L + U` counting the unit diagonal of `L` once.
    pub fn nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz() + self.u_diag.len()
    }

    /// Dense `L` with its unit diagonal.
    pub fn l_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = self.l.to_dense();
        m.fill_diagonal(1.0);
        m
    }

    /// Dense `U` including the diagonal.
    pub fn u_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = self.u.to_dense();
        for (i, &d) in self.u_diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `e = Pᵀ U⁻¹ L⁻¹ P r`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.nrows() {
            return Err(Error::Dimension {
                expected: self.nrows(),
                found: r.len(),
            });
        }
        let mut e = vec![0.0; r.len()];
        let mut work = vec![0.0; r.len()];
        self.apply_into(r, &mut e, &mut work);
        Ok(e)
    }

    /// Allocation-free variant of [`apply`](Self::apply); `work` has length `nrows`.
    pub fn apply_into(&self, r: &[f64], e: &mut [f64], work: &mut [f64]) {
        let n = self.nrows();
        for i in 0..n {
            let (cols, vals) = self.l.row(i);
            let mut s = r[self.perm[i]];
            for (&j, &v) in cols.iter().zip(vals) {
                s -= v * work[j];
            }
            work[i] = s;
        }
        for i in (0..n).rev() {
            let (cols, vals) = self.u.row(i);
            let mut s = work[i];
            for (&j, &v) in cols.iter().zip(vals) {
                s -= v * work[j];
            }
            work[i] = s / self.u_diag[i];
        }
        for i in 0..n {
            e[self.perm[i]] = work[i];
        }
    }
}

/// Keeps the `m` largest-magnitude entries (ties resolved by position), then restores column order.
fn keep_largest(entries: &mut Vec<(usize, f64)>, m: usize) {
    if entries.len() > m {
        entries.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        entries.truncate(m);
    }
    entries.sort_unstable_by_key(|e| e.0);
}

/// Row-wise IKJ incomplete LU with dual dropping.
///
/// Rule 1 drops entries below `tau` times the mean magnitude of the original row.
/// Rule 2 keeps at most `M = ceil(fillfactor · nnz(A) / n)` off-diagonal entries
/// in each of the `L` and `U` parts of every row.
pub fn ilut_factorize(
    a: &SparseMatrixCsr,
    tau: f64,
    fillfactor: f64,
    ordering: Ordering,
) -> Result<IlutFactorization> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: a.ncols(),
        });
    }
    if !(tau >= 0.0) || !(fillfactor >= 1.0) {
        return Err(Error::Argument(format!(
            "ILUT needs tau >= 0 and fillfactor >= 1 (got {tau}, {fillfactor})"
        )));
    }
    let perm: Vec<usize> = match ordering {
        Ordering::None => (0..n).collect(),
        Ordering::Rcm => rcm_ordering(a),
    };
    let mut perm_inverse = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        perm_inverse[old] = new;
    }
    let b = a.permute_symmetric(&perm)?;
    let max_fill = if n == 0 {
        0
    } else {
        ((fillfactor * b.nnz() as f64) / n as f64).ceil() as usize
    };

    let mut l_offsets = vec![0usize];
    let mut l_cols = Vec::new();
    let mut l_vals = Vec::new();
    let mut u_offsets = vec![0usize];
    let mut u_cols: Vec<usize> = Vec::new();
    let mut u_vals: Vec<f64> = Vec::new();
    let mut u_diag = vec![0.0; n];

    let mut w = vec![0.0; n];
    let mut present = vec![false; n];
    let mut nonzeros: Vec<usize> = Vec::new();
    let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    let mut lower: Vec<(usize, f64)> = Vec::new();
    let mut upper: Vec<(usize, f64)> = Vec::new();

    for i in 0..n {
        let (cols, vals) = b.row(i);
        let row_mean = if cols.is_empty() {
            0.0
        } else {
            vals.iter().map(|v| v.abs()).sum::<f64>() / cols.len() as f64
        };
        let drop_tol = tau * row_mean;
        for (&j, &v) in cols.iter().zip(vals) {
            w[j] = v;
            present[j] = true;
            nonzeros.push(j);
            if j < i {
                heap.push(Reverse(j));
            }
        }
        lower.clear();
        while let Some(Reverse(k)) = heap.pop() {
            let mult = w[k] / u_diag[k];
            w[k] = 0.0;
            if mult.abs() <= drop_tol || mult == 0.0 {
                continue;
            }
            lower.push((k, mult));
            for idx in u_offsets[k]..u_offsets[k + 1] {
                let j = u_cols[idx];
                if !present[j] {
                    present[j] = true;
                    nonzeros.push(j);
                    w[j] = 0.0;
                    if j < i {
                        heap.push(Reverse(j));
                    }
                }
                w[j] -= mult * u_vals[idx];
            }
        }
        upper.clear();
        let mut diag = 0.0;
        for &j in &nonzeros {
            if j == i {
                diag = w[j];
            } else if j > i && w[j].abs() > drop_tol && w[j] != 0.0 {
                upper.push((j, w[j]));
            }
            w[j] = 0.0;
            present[j] = false;
        }
        nonzeros.clear();
        if diag == 0.0 || !diag.is_finite() {
            return Err(Error::ZeroPivot { row: perm[i] });
        }
        keep_largest(&mut lower, max_fill);
        keep_largest(&mut upper, max_fill);
        u_diag[i] = diag;
        for &(j, v) in &lower {
            l_cols.push(j);
            l_vals.push(v);
        }
        l_offsets.push(l_cols.len());
        for &(j, v) in &upper {
            u_cols.push(j);
            u_vals.push(v);
        }
        u_offsets.push(u_cols.len());
    }

    Ok(IlutFactorization {
        l: SparseMatrixCsr::new(n, n, l_offsets, l_cols, l_vals)?,
        u: SparseMatrixCsr::new(n, n, u_offsets, u_cols, u_vals)?,
        u_diag,
        perm,
        perm_inverse,
        tau,
        fillfactor,
        max_fill,
    })
}

/// `e = Pᵀ U⁻¹ L⁻¹ P r` for a stored factorization.
pub fn ilut_apply(fac: &IlutFactorization, r: &[f64]) -> Result<Vec<f64>> {
    fac.apply(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn rand_stream(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn identity_factors() {
        let f = ilut_factorize(&SparseMatrixCsr::identity(4), 1e-12, 1.0, Ordering::Rcm).unwrap();
        assert_eq!(f.l().nnz(), 0);
        assert_eq!(f.u_strict().nnz(), 0);
        assert_eq!(f.u_diagonal(), &[1.0; 4]);
        let r = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(f.apply(&r).unwrap(), r);
    }

    #[test]
    fn two_by_two_hand_lu() {
        let a = SparseMatrixCsr::from_triplets(2, 2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let f = ilut_factorize(&a, 0.0, 10.0, Ordering::None).unwrap();
        let l = f.l_dense();
        let u = f.u_dense();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.25, 1.0]));
        assert_eq!(u, DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 0.0, 2.75]));
        let e = ilut_apply(&f, &[5.0, 4.0]).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_fill_reproduces_banded_spd() {
        let n = 60;
        let mut d = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = 6.0;
            for off in 1..=4 {
                if i + off < n {
                    let v = -1.0 / off as f64;
                    d[(i, i + off)] = v;
                    d[(i + off, i)] = v;
                }
            }
        }
        let a = SparseMatrixCsr::from_dense(&d);
        for ordering in [Ordering::None, Ordering::Rcm] {
            let f = ilut_factorize(&a, 1e-12, 100.0, ordering).unwrap();
            let pa = a.permute_symmetric(f.perm()).unwrap().to_dense();
            let diff = (pa - f.l_dense() * f.u_dense()).abs().max();
            assert!(diff < 1e-10 * a.max_abs(), "{ordering:?}: {diff}");
        }
    }

    #[test]
    fn random_dense_exact_solve() {
        let n = 30;
        let mut next = rand_stream(3);
        let mut d = DMatrix::<f64>::from_fn(n, n, |_, _| next());
        for i in 0..n {
            d[(i, i)] += 2.0 * n as f64;
        }
        let a = SparseMatrixCsr::from_dense(&d);
        let f = ilut_factorize(&a, 0.0, n as f64, Ordering::Rcm).unwrap();
        let r: Vec<f64> = (0..n).map(|_| next()).collect();
        let e = f.apply(&r).unwrap();
        let ae = a.spmv(&e).unwrap();
        let err: f64 = ae.iter().zip(&r).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn fill_cap_is_respected() {
        let n = 80;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            for off in [1usize, 9] {
                if i + off < n {
                    t.push((i, i + off, -1.0));
                    t.push((i + off, i, -1.0));
                }
            }
        }
        let a = SparseMatrixCsr::from_triplets(n, n, &t).unwrap();
        let f = ilut_factorize(&a, 1e-12, 1.0, Ordering::None).unwrap();
        let m = f.max_fill();
        assert_eq!(m, (a.nnz() as f64 / n as f64).ceil() as usize);
        for i in 0..n {
            assert!(f.l().row(i).0.len() <= m);
            assert!(f.u_strict().row(i).0.len() <= m);
        }
        assert!(f.nnz() <= (2 * m + 1) * n);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = SparseMatrixCsr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(
            ilut_factorize(&a, 0.0, 10.0, Ordering::None).unwrap_err(),
            Error::ZeroPivot { row: 1 }
        );
    }
}
