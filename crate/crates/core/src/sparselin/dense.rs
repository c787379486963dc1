use super::csr::SparseMatrixCsr;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, LU};

/// Dense LU of a small sparse matrix, used as an exact coarsest-level solver.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: &SparseMatrixCsr) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let lu = DMatrix::from(a.to_dense()).lu();
        if !lu.is_invertible() {
            return Err(Error::Analysis("coarsest matrix is singular".into()));
        }
        Ok(Self { lu, n: a.nrows() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.lu
            .solve(&DVector::from_column_slice(b))
            .expect("invertible")
            .as_slice()
            .to_vec()
    }
}
