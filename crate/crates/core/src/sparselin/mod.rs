//! Sparse kernels: CSR storage, Gauss–Seidel, RCM ordering, ILUT and BiCGSTAB.

mod bicgstab;
mod csr;
mod dense;
mod gauss_seidel;
mod ilut;
pub mod mmio;
mod rcm;

pub use bicgstab::{bicgstab, Identity, KrylovReport, LinearOperator};
pub use csr::SparseMatrixCsr;
pub use dense::DenseLu;
pub use gauss_seidel::{gauss_seidel_sweep, GaussSeidel};
pub use ilut::{ilut_apply, ilut_factorize, IlutFactorization, Ordering};
pub use rcm::rcm_ordering;
