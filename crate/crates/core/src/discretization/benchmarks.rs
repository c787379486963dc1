use crate::error::{Error, Result};
use crate::splines::{GeometryPatch, MultiPatchDomain, TensorBasis2D};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Scalar field on physical coordinates.
pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Coefficients of `−∇·(D∇u) + v·∇u + R u = f` with Dirichlet data `g`.
#[derive(Clone)]
pub struct CdrCoefficients {
    pub diffusion: [[f64; 2]; 2],
    pub velocity: [f64; 2],
    pub reaction: f64,
    pub source: ScalarFn,
    pub dirichlet: ScalarFn,
}

impl fmt::Debug for CdrCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CdrCoefficients")
            .field("diffusion", &self.diffusion)
            .field("velocity", &self.velocity)
            .field("reaction", &self.reaction)
            .finish_non_exhaustive()
    }
}

impl CdrCoefficients {
    /// Rejects a diffusion tensor whose symmetric part is not positive definite.
    pub fn new(
        diffusion: [[f64; 2]; 2],
        velocity: [f64; 2],
        reaction: f64,
        source: ScalarFn,
        dirichlet: ScalarFn,
    ) -> Result<Self> {
        let a = diffusion[0][0];
        let b = 0.5 * (diffusion[0][1] + diffusion[1][0]);
        let d = diffusion[1][1];
        if !(a > 0.0 && a * d - b * b > 0.0) {
            return Err(Error::Argument(format!(
                "symmetric part of the diffusion tensor {diffusion:?} is not positive definite"
            )));
        }
        Ok(Self {
            diffusion,
            velocity,
            reaction,
            source,
            dirichlet,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Quarter annulus with radii 1 and 2 in the first quadrant.
    QuarterAnnulus,
    UnitSquare,
    /// `[−1,1]² \ [0,1]²` as three unit-square patches.
    LShape,
}

impl Geometry {
    pub fn patches(self) -> Vec<GeometryPatch> {
        match self {
            Geometry::QuarterAnnulus => vec![GeometryPatch::quarter_annulus(1.0, 2.0)],
            Geometry::UnitSquare => vec![GeometryPatch::unit_square()],
            Geometry::LShape => vec![
                GeometryPatch::rectangle(-1.0, 0.0, 0.0, 1.0),
                GeometryPatch::rectangle(-1.0, 0.0, -1.0, 0.0),
                GeometryPatch::rectangle(0.0, 1.0, -1.0, 0.0),
            ],
        }
    }

    pub fn area(self) -> f64 {
        match self {
            Geometry::QuarterAnnulus => 0.75 * PI,
            Geometry::UnitSquare => 1.0,
            Geometry::LShape => 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Homogeneous,
    Inhomogeneous,
}

/// A model problem with known exact solution.
#[derive(Clone)]
pub struct BenchmarkSpec {
    pub id: u8,
    pub geometry: Geometry,
    pub coefficients: CdrCoefficients,
    pub exact: ScalarFn,
    pub boundary: BoundaryKind,
}

impl fmt::Debug for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkSpec")
            .field("id", &self.id)
            .field("geometry", &self.geometry)
            .field("coefficients", &self.coefficients)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

fn zero() -> ScalarFn {
    Arc::new(|_| 0.0)
}

/// Harmonic function with the re-entrant corner singularity of the L-shape.
pub fn l_shape_solution(x: [f64; 2]) -> f64 {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return 0.0;
    }
    let mut theta = x[1].atan2(x[0]);
    // Points on the positive x-axis belong to the lower arm (θ = 2π).
    if theta < 0.0 || (theta == 0.0 && x[0] > 0.0) {
        theta += 2.0 * PI;
    }
    r.powf(2.0 / 3.0) * ((2.0 * theta - PI) / 3.0).sin()
}

impl BenchmarkSpec {
    /// Benchmark `id` ∈ {1, 2, 3}.
    pub fn new(id: u8) -> Result<Self> {
        match id {
            1 => {
                let exact: ScalarFn = Arc::new(|[x, y]| {
                    let r2 = x * x + y * y;
                    -(r2 - 1.0) * (r2 - 4.0) * x * y * y
                });
                let source: ScalarFn = Arc::new(|[x, y]| {
                    let (x3, y2) = (x * x * x, y * y);
                    2.0 * x3 * x * x + 44.0 * x3 * y2 - 10.0 * x3 + 42.0 * x * y2 * y2 - 90.0 * x * y2 + 8.0 * x
                });
                Ok(Self {
                    id,
                    geometry: Geometry::QuarterAnnulus,
                    coefficients: CdrCoefficients::new([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0, source, zero())?,
                    exact,
                    boundary: BoundaryKind::Homogeneous,
                })
            }
            2 => {
                let exact: ScalarFn = Arc::new(|[x, y]| (PI * x).sin() * (PI * y).sin());
                let source: ScalarFn = Arc::new(|[x, y]| {
                    let (sx, cx) = (PI * x).sin_cos();
                    let (sy, cy) = (PI * y).sin_cos();
                    let pi2 = PI * PI;
                    (0.3 + 2.1 * pi2) * sx * sy + 1.1 * pi2 * cx * cy + 0.4 * PI * cx * sy - 0.2 * PI * sx * cy
                });
                Ok(Self {
                    id,
                    geometry: Geometry::UnitSquare,
                    coefficients: CdrCoefficients::new(
                        [[1.2, -0.7], [-0.4, 0.9]],
                        [0.4, -0.2],
                        0.3,
                        source,
                        zero(),
                    )?,
                    exact,
                    boundary: BoundaryKind::Homogeneous,
                })
            }
            3 => {
                let exact: ScalarFn = Arc::new(l_shape_solution);
                Ok(Self {
                    id,
                    geometry: Geometry::LShape,
                    coefficients: CdrCoefficients::new(
                        [[1.0, 0.0], [0.0, 1.0]],
                        [0.0, 0.0],
                        0.0,
                        zero(),
                        exact.clone(),
                    )?,
                    exact,
                    boundary: BoundaryKind::Inhomogeneous,
                })
            }
            _ => Err(Error::Argument(format!("unknown benchmark {id}; expected 1, 2 or 3"))),
        }
    }

    /// Conforming multipatch space of degree `p` with knot spacing `2^-level` on each
    /// original patch; every patch is further cut into `2^split × 2^split` pieces.
    pub fn domain(&self, p: usize, level: u32, split: u32) -> Result<MultiPatchDomain> {
        if split > level {
            return Err(Error::Argument(format!(
                "split {split} exceeds refinement level {level}"
            )));
        }
        let pieces = 1usize << split;
        let mut patches = Vec::new();
        for base in self.geometry.patches() {
            if split == 0 {
                patches.push(base);
                continue;
            }
            for j in 0..pieces {
                for i in 0..pieces {
                    let (a0, a1) = (i as f64 / pieces as f64, (i + 1) as f64 / pieces as f64);
                    let (b0, b1) = (j as f64 / pieces as f64, (j + 1) as f64 / pieces as f64);
                    patches.push(base.restricted(a0, a1, b0, b1)?);
                }
            }
        }
        let basis = TensorBasis2D::uniform(p, 1usize << (level - split))?;
        MultiPatchDomain::new(patches, basis)
    }

    /// Pointwise PDE residual of the exact solution by central differences.
    pub fn pde_residual(&self, x: [f64; 2], step: f64) -> f64 {
        let u = |dx: f64, dy: f64| (self.exact)([x[0] + dx, x[1] + dy]);
        let e = step;
        let u0 = u(0.0, 0.0);
        let ux = (u(e, 0.0) - u(-e, 0.0)) / (2.0 * e);
        let uy = (u(0.0, e) - u(0.0, -e)) / (2.0 * e);
        let uxx = (u(e, 0.0) - 2.0 * u0 + u(-e, 0.0)) / (e * e);
        let uyy = (u(0.0, e) - 2.0 * u0 + u(0.0, -e)) / (e * e);
        let uxy = (u(e, e) - u(e, -e) - u(-e, e) + u(-e, -e)) / (4.0 * e * e);
        let c = &self.coefficients;
        let d = c.diffusion;
        let div = d[0][0] * uxx + (d[0][1] + d[1][0]) * uxy + d[1][1] * uyy;
        -div + c.velocity[0] * ux + c.velocity[1] * uy + c.reaction * u0 - (c.source)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_points(g: Geometry, n: usize) -> Vec<[f64; 2]> {
        let patches = g.patches();
        let mut s = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            0.05 + 0.9 * ((s >> 11) as f64 / (1u64 << 53) as f64)
        };
        (0..n)
            .map(|i| {
                let patch = &patches[i % patches.len()];
                patch.eval(next(), next()).unwrap().0
            })
            .collect()
    }

    #[test]
    fn exact_solutions_satisfy_the_pde() {
        for id in 1..=3 {
            let b = BenchmarkSpec::new(id).unwrap();
            for x in sample_points(b.geometry, 10) {
                let r = b.pde_residual(x, 1e-4);
                assert!(r.abs() < 1e-4, "benchmark {id} at {x:?}: residual {r}");
            }
        }
    }

    #[test]
    fn boundary_values() {
        let b1 = BenchmarkSpec::new(1).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let a = t * PI / 2.0;
            assert!((b1.exact)([a.cos(), a.sin()]).abs() < 1e-14);
            assert!((b1.exact)([2.0 * a.cos(), 2.0 * a.sin()]).abs() < 1e-13);
        }
        // Re-entrant edges of the L-shape carry zero data; the solution is continuous across y = 0.
        assert!(l_shape_solution([0.5, 0.0]).abs() < 1e-15);
        assert!(l_shape_solution([0.0, 0.5]).abs() < 1e-15);
        let up = l_shape_solution([-0.5, 1e-12]);
        let down = l_shape_solution([-0.5, -1e-12]);
        assert!((up - down).abs() < 1e-10);
        assert!((l_shape_solution([-0.5, -0.0]) - up).abs() < 1e-10);
    }

    #[test]
    fn indefinite_diffusion_rejected() {
        let r = CdrCoefficients::new([[1.0, 2.0], [2.0, 1.0]], [0.0; 2], 0.0, zero(), zero());
        assert!(r.is_err());
        assert!(BenchmarkSpec::new(4).is_err());
    }

    #[test]
    fn split_domains() {
        let b3 = BenchmarkSpec::new(3).unwrap();
        let d = b3.domain(2, 4, 1).unwrap();
        assert_eq!(d.num_patches(), 12);
        assert_eq!(d.boundary_sides().len(), 16);
        assert!(b3.domain(2, 1, 2).is_err());
    }
}
