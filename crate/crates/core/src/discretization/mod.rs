//! Galerkin assembly of the convection–diffusion–reaction form with Nitsche
//! boundary terms, mass and transfer matrices, and the benchmark problems.

mod assembly;
mod benchmarks;
mod quadrature;

pub use assembly::{
    assemble_mass, assemble_problem, assemble_problem_with_penalty, assemble_system, assemble_transfer, boundary_error, dense_solve,
    discretization_error, interpolate, lump_mass, nitsche_penalty, DiscreteProblem,
};
pub use benchmarks::{l_shape_solution, BenchmarkSpec, BoundaryKind, CdrCoefficients, Geometry, ScalarFn};
pub use quadrature::GaussRule;
