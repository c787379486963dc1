//! Univariate and tensor-product B-spline bases, NURBS geometry maps and
//! conforming multipatch domains.

mod geometry;
mod knots;
mod multipatch;

pub use geometry::{det2, GeometryPatch, Jacobian, TensorBasis2D};
pub use knots::KnotVector;
pub use multipatch::{Interface, MultiPatchDomain, Side};
