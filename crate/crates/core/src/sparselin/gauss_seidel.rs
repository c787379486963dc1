use super::csr::SparseMatrixCsr;
use crate::error::{Error, Result};

/// Precomputed diagonal positions for repeated Gauss–Seidel sweeps on one matrix.
#[derive(Debug, Clone)]
pub struct GaussSeidel {
    diag: Vec<f64>,
}

impl GaussSeidel {
    pub fn new(a: &SparseMatrixCsr) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let diag = a.diagonal();
        if let Some(row) = diag.iter().position(|&d| d == 0.0 || !d.is_finite()) {
            return Err(Error::ZeroDiagonal { row });
        }
        Ok(Self { diag })
    }

    /// One forward sweep, rows in increasing order.
    pub fn forward(&self, a: &SparseMatrixCsr, u: &mut [f64], f: &[f64]) {
        for i in 0..a.nrows() {
            self.relax(a, u, f, i);
        }
    }

    /// One backward sweep, rows in decreasing order.
    pub fn backward(&self, a: &SparseMatrixCsr, u: &mut [f64], f: &[f64]) {
        for i in (0..a.nrows()).rev() {
            self.relax(a, u, f, i);
        }
    }

    #[inline]
    fn relax(&self, a: &SparseMatrixCsr, u: &mut [f64], f: &[f64], i: usize) {
        let (cols, vals) = a.row(i);
        let mut s = f[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                s -= v * u[j];
            }
        }
        u[i] = s / self.diag[i];
    }
}

/// A single forward Gauss–Seidel sweep on `A u = f`.
pub fn gauss_seidel_sweep(a: &SparseMatrixCsr, u: &mut [f64], f: &[f64]) -> Result<()> {
    if u.len() != a.ncols() || f.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: u.len().min(f.len()),
        });
    }
    GaussSeidel::new(a)?.forward(a, u, f);
    Ok(())
}
