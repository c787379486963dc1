//! p-multigrid: level operators with lumped L² transfers, ILUT or Gauss–Seidel
//! smoothing, an h-multigrid coarse solver at p = 1 and solve drivers.

mod hierarchy;
mod operators;

pub use hierarchy::{
    build_hierarchy, seeded_initial_guess, CycleType, HmgHierarchy, PmgHierarchy, PmgOptions, PmgPreconditioner,
    SmootherKind, Smoother, SolveReport, Work, DIVERGENCE_THRESHOLD,
};
pub use operators::{
    assemble_operators, assemble_operators_for, galerkin_projection, linear_interpolation, AssemblyOptions,
    CoarseOperator, HLevel, OperatorLevel, PmgOperators,
};
