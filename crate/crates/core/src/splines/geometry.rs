use super::knots::KnotVector;
use crate::error::{Error, Result};

/// Tensor product of two univariate B-spline bases of equal degree.
///
/// Degrees of freedom are numbered with the first parameter direction running
/// fastest: `i = ix + iy * nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBasis2D {
    basis_x: KnotVector,
    basis_y: KnotVector,
}

impl TensorBasis2D {
    /// Solution-space basis; both directions must carry the same degree.
    pub fn new(basis_x: KnotVector, basis_y: KnotVector) -> Result<Self> {
        if basis_x.degree() != basis_y.degree() {
            return Err(Error::Argument(format!(
                "tensor basis degrees differ: {} vs {}",
                basis_x.degree(),
                basis_y.degree()
            )));
        }
        Ok(Self { basis_x, basis_y })
    }

    /// Basis with independent degrees per direction, as used by geometry maps.
    pub fn anisotropic(basis_x: KnotVector, basis_y: KnotVector) -> Self {
        Self { basis_x, basis_y }
    }

    /// Open uniform basis of degree `p` with `num_spans` spans per direction.
    pub fn uniform(degree: usize, num_spans: usize) -> Result<Self> {
        let kv = KnotVector::open_uniform(degree, num_spans)?;
        Ok(Self {
            basis_x: kv.clone(),
            basis_y: kv,
        })
    }

    pub fn basis_x(&self) -> &KnotVector {
        &self.basis_x
    }

    pub fn basis_y(&self) -> &KnotVector {
        &self.basis_y
    }

    pub fn degree(&self) -> usize {
        self.basis_x.degree()
    }

    pub fn nx(&self) -> usize {
        self.basis_x.num_basis()
    }

    pub fn ny(&self) -> usize {
        self.basis_y.num_basis()
    }

    pub fn ndof(&self) -> usize {
        self.nx() * self.ny()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix + iy * self.nx()
    }

    #[inline]
    pub fn split_index(&self, i: usize) -> (usize, usize) {
        (i % self.nx(), i / self.nx())
    }
}

/// A 2×2 Jacobian stored row-major: `[[∂x/∂ξ, ∂x/∂η], [∂y/∂ξ, ∂y/∂η]]`.
pub type Jacobian = [[f64; 2]; 2];

#[inline]
pub fn det2(j: &Jacobian) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// A single NURBS patch `F: [0,1]² → Ω^(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryPatch {
    basis: TensorBasis2D,
    control_net: Vec<[f64; 2]>,
    weights: Vec<f64>,
    /// Sub-rectangle `[a0,a1]×[b0,b1]` of the parameter square this patch covers.
    window: [f64; 4],
}

impl GeometryPatch {
    /// Control points and weights in the tensor order of `basis`.
    pub fn new(basis: TensorBasis2D, control_net: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        let n = basis.ndof();
        if control_net.len() != n || weights.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: control_net.len().min(weights.len()),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Argument("NURBS weights must be positive".into()));
        }
        let (kx, ky) = (basis.basis_x(), basis.basis_y());
        if kx.first() != 0.0 || kx.last() != 1.0 || ky.first() != 0.0 || ky.last() != 1.0 {
            return Err(Error::Argument("geometry parameter domain must be [0,1]²".into()));
        }
        Ok(Self {
            basis,
            control_net,
            weights,
            window: [0.0, 1.0, 0.0, 1.0],
        })
    }

    /// The same map restricted to `[a0,a1]×[b0,b1]` and reparametrized over `[0,1]²`.
    pub fn restricted(&self, a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self> {
        if !(0.0 <= a0 && a0 < a1 && a1 <= 1.0 && 0.0 <= b0 && b0 < b1 && b1 <= 1.0) {
            return Err(Error::Argument(format!(
                "invalid parameter window [{a0},{a1}]x[{b0},{b1}]"
            )));
        }
        let [c0, c1, d0, d1] = self.window;
        let mut out = self.clone();
        out.window = [
            c0 + a0 * (c1 - c0),
            c0 + a1 * (c1 - c0),
            d0 + b0 * (d1 - d0),
            d0 + b1 * (d1 - d0),
        ];
        Ok(out)
    }

    /// Bilinear map of the axis-aligned rectangle `[x0,x1]×[y0,y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let basis = TensorBasis2D::uniform(1, 1).expect("valid basis");
        let net = vec![[x0, y0], [x1, y0], [x0, y1], [x1, y1]];
        Self::new(basis, net, vec![1.0; 4]).expect("valid rectangle")
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 1.0, 0.0, 1.0)
    }

    /// Exact quarter annulus in the first quadrant.
    ///
    /// ξ runs radially from `r_inner` to `r_outer` (linear); η runs along the arc
    /// from the positive x-axis to the positive y-axis (quadratic, middle weight √2/2).
    pub fn quarter_annulus(r_inner: f64, r_outer: f64) -> Self {
        let kx = KnotVector::open_uniform(1, 1).expect("valid");
        let ky = KnotVector::open_uniform(2, 1).expect("valid");
        let basis = TensorBasis2D::anisotropic(kx, ky);
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let mut net = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (dir, wt) in [([1.0, 0.0], 1.0), ([1.0, 1.0], w), ([0.0, 1.0], 1.0)] {
            for r in [r_inner, r_outer] {
                net.push([r * dir[0], r * dir[1]]);
                weights.push(wt);
            }
        }
        Self::new(basis, net, weights).expect("valid annulus")
    }

    pub fn basis(&self) -> &TensorBasis2D {
        &self.basis
    }

    pub fn control_net(&self) -> &[[f64; 2]] {
        &self.control_net
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Physical point and Jacobian without the invertibility check.
    pub fn eval(&self, xi: f64, eta: f64) -> Result<([f64; 2], Jacobian)> {
        let [a0, a1, b0, b1] = self.window;
        let (sa, sb) = (a1 - a0, b1 - b0);
        let xi = (a0 + xi * sa).clamp(a0, a1);
        let eta = (b0 + eta * sb).clamp(b0, b1);
        let kx = self.basis.basis_x();
        let ky = self.basis.basis_y();
        let sx = kx.find_span(xi)?;
        let sy = ky.find_span(eta)?;
        let dx = kx.ders_basis_funs(sx, xi, 1);
        let dy = ky.ders_basis_funs(sy, eta, 1);
        let (px, py) = (kx.degree(), ky.degree());
        let (fx, fy) = (sx - px, sy - py);

        let mut w = 0.0;
        let mut w_xi = 0.0;
        let mut w_eta = 0.0;
        let mut a = [0.0; 2];
        let mut a_xi = [0.0; 2];
        let mut a_eta = [0.0; 2];
        for b in 0..=py {
            for c in 0..=px {
                let idx = self.basis.index(fx + c, fy + b);
                let wt = self.weights[idx];
                let cp = self.control_net[idx];
                let n = dx[0][c] * dy[0][b] * wt;
                let n_xi = dx[1][c] * dy[0][b] * wt;
                let n_eta = dx[0][c] * dy[1][b] * wt;
                w += n;
                w_xi += n_xi;
                w_eta += n_eta;
                for d in 0..2 {
                    a[d] += n * cp[d];
                    a_xi[d] += n_xi * cp[d];
                    a_eta[d] += n_eta * cp[d];
                }
            }
        }
        let x = [a[0] / w, a[1] / w];
        let mut jac = [[0.0; 2]; 2];
        for d in 0..2 {
            jac[d][0] = sa * (a_xi[d] - x[d] * w_xi) / w;
            jac[d][1] = sb * (a_eta[d] - x[d] * w_eta) / w;
        }
        Ok((x, jac))
    }

    /// `F(ξ, η)` and its Jacobian; fails when `det J ≤ 0`.
    pub fn geometry_map(&self, xi: f64, eta: f64) -> Result<([f64; 2], Jacobian)> {
        let (x, jac) = self.eval(xi, eta)?;
        let det = det2(&jac);
        if !(det > 0.0) {
            return Err(Error::Geometry {
                patch: 0,
                xi,
                eta,
                det,
            });
        }
        Ok((x, jac))
    }
}
