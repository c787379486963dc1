//! Isogeometric discretization of the 2D convection–diffusion–reaction equation
//! and p-multigrid solvers with ILUT or Gauss–Seidel smoothing.

pub mod analysis;
pub mod discretization;
pub mod error;
pub mod pmg;
pub mod sparselin;
pub mod splines;

pub use error::{Error, Result};
