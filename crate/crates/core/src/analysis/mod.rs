//! Spectral diagnostics of the multigrid cycle: generalized eigenpairs,
//! per-mode reduction factors, iteration matrices, spectral radii and
//! condition numbers. Dense paths only.

mod eigen;
mod iteration;

pub use eigen::{condition_number, generalized_eigs, spectral_radius, GeneralizedEigenSystem, SpectralReport, DENSE_LIMIT};
pub use iteration::{
    eigenvalue_csv, estimate_spectral_radius, iteration_matrix, laplace_operators, reduction_csv, reduction_factors,
    reduction_profiles, Reduction, ReductionProfile, ITERATION_MATRIX_LIMIT,
};
