use super::benchmarks::{BenchmarkSpec, CdrCoefficients, ScalarFn};
use super::quadrature::GaussRule;
use crate::error::{Error, Result};
use crate::sparselin::SparseMatrixCsr;
use crate::splines::{det2, GeometryPatch, KnotVector, MultiPatchDomain, Side};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Elements assembled per parallel batch; bounds the memory held by local matrices.
const BATCH: usize = 512;

/// Assembled linear system `A u = f` for one spline space.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub domain: MultiPatchDomain,
    pub matrix: SparseMatrixCsr,
    pub rhs: Vec<f64>,
    pub penalty: f64,
}

impl DiscreteProblem {
    pub fn degree(&self) -> usize {
        self.domain.degree()
    }

    pub fn ndof(&self) -> usize {
        self.domain.global_ndof()
    }
}

/// Nitsche penalty constant for degree `p` (divided by the element height in the form).
pub fn nitsche_penalty(p: usize) -> f64 {
    16.0 * (p * p) as f64
}

/// Basis values and first derivatives of one element at each quadrature point.
struct ElementTable {
    first: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// `[q * (p + 1) + a]`
    val: Vec<f64>,
    der: Vec<f64>,
}

fn element_tables(kv: &KnotVector, rule: &GaussRule) -> Vec<ElementTable> {
    let p = kv.degree();
    let k = kv.knots();
    kv.element_spans()
        .map(|s| {
            let (lo, hi) = (k[s], k[s + 1]);
            let width = hi - lo;
            let points: Vec<f64> = rule.points.iter().map(|t| lo + width * t).collect();
            let weights: Vec<f64> = rule.weights.iter().map(|w| w * width).collect();
            let mut val = Vec::with_capacity(points.len() * (p + 1));
            let mut der = Vec::with_capacity(points.len() * (p + 1));
            for &x in &points {
                let d = kv.ders_basis_funs(s, x, 1.min(p));
                val.extend_from_slice(&d[0]);
                if p == 0 {
                    der.push(0.0);
                } else {
                    der.extend_from_slice(&d[1]);
                }
            }
            ElementTable {
                first: s - p,
                points,
                weights,
                val,
                der,
            }
        })
        .collect()
}

/// Values and derivatives of the `p + 1` active functions at a single point.
fn point_basis(kv: &KnotVector, xi: f64) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    let p = kv.degree();
    let s = kv.find_span(xi)?;
    let d = kv.ders_basis_funs(s, xi, 1.min(p));
    let der = if p == 0 { vec![0.0] } else { d[1].clone() };
    Ok((s - p, d[0].clone(), der))
}

struct MappedPoint {
    x: [f64; 2],
    jac: [[f64; 2]; 2],
    jinv: [[f64; 2]; 2],
    det: f64,
}

fn map_point(patch: &GeometryPatch, k: usize, xi: f64, eta: f64) -> Result<MappedPoint> {
    let (x, jac) = patch.eval(xi, eta)?;
    let det = det2(&jac);
    if !(det > 1e-14) {
        return Err(Error::Geometry { patch: k, xi, eta, det });
    }
    let jinv = [
        [jac[1][1] / det, -jac[0][1] / det],
        [-jac[1][0] / det, jac[0][0] / det],
    ];
    Ok(MappedPoint { x, jac, jinv, det })
}

/// Tensor basis values and physical gradients at one point from 1D data.
struct LocalBasis {
    val: Vec<f64>,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl LocalBasis {
    fn new(n: usize) -> Self {
        Self {
            val: vec![0.0; n],
            gx: vec![0.0; n],
            gy: vec![0.0; n],
        }
    }

    /// Local index `a + b (p + 1)` for x-function `a`, y-function `b`.
    fn fill(&mut self, nx: &[f64], dx: &[f64], ny: &[f64], dy: &[f64], jinv: &[[f64; 2]; 2]) {
        let m = nx.len();
        for b in 0..ny.len() {
            for a in 0..m {
                let l = a + b * m;
                let (dxi, deta) = (dx[a] * ny[b], nx[a] * dy[b]);
                self.val[l] = nx[a] * ny[b];
                self.gx[l] = jinv[0][0] * dxi + jinv[1][0] * deta;
                self.gy[l] = jinv[0][1] * dxi + jinv[1][1] * deta;
            }
        }
    }
}

/// Per-patch data for volume loops.
struct PatchTables {
    x: Vec<ElementTable>,
    y: Vec<ElementTable>,
}

fn patch_tables(domain: &MultiPatchDomain, rule: &GaussRule) -> Vec<PatchTables> {
    (0..domain.num_patches())
        .map(|k| {
            let b = domain.basis(k);
            PatchTables {
                x: element_tables(b.basis_x(), rule),
                y: element_tables(b.basis_y(), rule),
            }
        })
        .collect()
}

fn check_same_mesh(test: &MultiPatchDomain, trial: &MultiPatchDomain) -> Result<()> {
    if test.num_patches() != trial.num_patches() || test.patches() != trial.patches() {
        return Err(Error::Assembly("test and trial spaces live on different geometries".into()));
    }
    for k in 0..test.num_patches() {
        let (a, b) = (test.basis(k), trial.basis(k));
        let same = |u: &KnotVector, v: &KnotVector| {
            u.num_elements() == v.num_elements()
                && u.element_spans()
                    .zip(v.element_spans())
                    .all(|(i, j)| (u.knots()[i] - v.knots()[j]).abs() < 1e-14)
        };
        if !same(a.basis_x(), b.basis_x()) || !same(a.basis_y(), b.basis_y()) {
            return Err(Error::Assembly(format!("patch {k}: test and trial meshes differ")));
        }
    }
    Ok(())
}

/// Inclusive trial-index range coupled to each test function in one direction.
fn coupling_1d(test: &KnotVector, trial: &KnotVector) -> Vec<(usize, usize)> {
    let (pt, pr) = (test.degree(), trial.degree());
    let mut r = vec![(usize::MAX, 0usize); test.num_basis()];
    for (st, sr) in test.element_spans().zip(trial.element_spans()) {
        let (ft, fr) = (st - pt, sr - pr);
        for e in r.iter_mut().skip(ft).take(pt + 1) {
            e.0 = e.0.min(fr);
            e.1 = e.1.max(fr + pr);
        }
    }
    r
}

/// Zero matrix carrying every test/trial pair with overlapping support.
fn sparsity(test: &MultiPatchDomain, trial: &MultiPatchDomain) -> SparseMatrixCsr {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); test.global_ndof()];
    for k in 0..test.num_patches() {
        let (bt, br) = (test.basis(k), trial.basis(k));
        let cx = coupling_1d(bt.basis_x(), br.basis_x());
        let cy = coupling_1d(bt.basis_y(), br.basis_y());
        let (gt, gr) = (test.local_to_global(k), trial.local_to_global(k));
        for iy in 0..bt.ny() {
            for ix in 0..bt.nx() {
                let row = &mut rows[gt[bt.index(ix, iy)]];
                for jy in cy[iy].0..=cy[iy].1 {
                    for jx in cx[ix].0..=cx[ix].1 {
                        row.push(gr[br.index(jx, jy)]);
                    }
                }
            }
        }
    }
    SparseMatrixCsr::from_pattern(test.global_ndof(), trial.global_ndof(), rows)
}

/// Quadrature-point data handed to volume kernels.
struct Qp<'a> {
    x: [f64; 2],
    wdet: f64,
    test: &'a LocalBasis,
    trial: &'a LocalBasis,
}

struct LocalContribution {
    patch: usize,
    test_first: (usize, usize),
    trial_first: (usize, usize),
    mat: Vec<f64>,
    rhs: Vec<f64>,
}

/// Element loop over the mixed test/trial space with a user kernel per quadrature point.
///
/// The kernel accumulates into a row-major `n_test × n_trial` local matrix and a
/// local load vector. Elements are evaluated in parallel batches and scattered in
/// a fixed order, so results do not depend on the worker count.
fn volume_loop<F>(
    test: &MultiPatchDomain,
    trial: &MultiPatchDomain,
    rule: &GaussRule,
    with_rhs: bool,
    kernel: F,
) -> Result<(SparseMatrixCsr, Vec<f64>)>
where
    F: Fn(&Qp, &mut [f64], &mut [f64]) + Sync,
{
    check_same_mesh(test, trial)?;
    let tt = patch_tables(test, rule);
    let tr = patch_tables(trial, rule);
    let (pt, pr) = (test.degree(), trial.degree());
    let (nt, nr) = ((pt + 1) * (pt + 1), (pr + 1) * (pr + 1));

    let mut jobs = Vec::new();
    for (k, t) in tt.iter().enumerate() {
        for ey in 0..t.y.len() {
            for ex in 0..t.x.len() {
                jobs.push((k, ex, ey));
            }
        }
    }

    let element = |&(k, ex, ey): &(usize, usize, usize)| -> Result<LocalContribution> {
        let patch = &test.patches()[k];
        let (tx, ty) = (&tt[k].x[ex], &tt[k].y[ey]);
        let (rx, ry) = (&tr[k].x[ex], &tr[k].y[ey]);
        let mut mat = vec![0.0; nt * nr];
        let mut rhs = vec![0.0; if with_rhs { nt } else { 0 }];
        let mut bt = LocalBasis::new(nt);
        let mut br = LocalBasis::new(nr);
        let nq = rule.len();
        for qy in 0..nq {
            for qx in 0..nq {
                let mp = map_point(patch, k, tx.points[qx], ty.points[qy])
                    .map_err(|e| with_patch(e, k))?;
                let wdet = tx.weights[qx] * ty.weights[qy] * mp.det;
                let (a0, a1) = (qx * (pt + 1), qy * (pt + 1));
                bt.fill(
                    &tx.val[a0..a0 + pt + 1],
                    &tx.der[a0..a0 + pt + 1],
                    &ty.val[a1..a1 + pt + 1],
                    &ty.der[a1..a1 + pt + 1],
                    &mp.jinv,
                );
                let (b0, b1) = (qx * (pr + 1), qy * (pr + 1));
                br.fill(
                    &rx.val[b0..b0 + pr + 1],
                    &rx.der[b0..b0 + pr + 1],
                    &ry.val[b1..b1 + pr + 1],
                    &ry.der[b1..b1 + pr + 1],
                    &mp.jinv,
                );
                let qp = Qp {
                    x: mp.x,
                    wdet,
                    test: &bt,
                    trial: &br,
                };
                kernel(&qp, &mut mat, &mut rhs);
            }
        }
        Ok(LocalContribution {
            patch: k,
            test_first: (tx.first, ty.first),
            trial_first: (rx.first, ry.first),
            mat,
            rhs,
        })
    };

    let mut a = sparsity(test, trial);
    let mut f = vec![0.0; test.global_ndof()];
    let mut gt = vec![0usize; nt];
    let mut gr = vec![0usize; nr];
    for batch in jobs.chunks(BATCH) {
        let locals: Vec<LocalContribution> = batch.par_iter().map(element).collect::<Result<_>>()?;
        for lc in locals {
            let (bt, br) = (test.basis(lc.patch), trial.basis(lc.patch));
            let (mt, mr) = (test.local_to_global(lc.patch), trial.local_to_global(lc.patch));
            for b in 0..=pt {
                for a_ in 0..=pt {
                    gt[a_ + b * (pt + 1)] = mt[bt.index(lc.test_first.0 + a_, lc.test_first.1 + b)];
                }
            }
            for b in 0..=pr {
                for a_ in 0..=pr {
                    gr[a_ + b * (pr + 1)] = mr[br.index(lc.trial_first.0 + a_, lc.trial_first.1 + b)];
                }
            }
            for i in 0..nt {
                for j in 0..nr {
                    a.add_to(gt[i], gr[j], lc.mat[i * nr + j]);
                }
                if with_rhs {
                    f[gt[i]] += lc.rhs[i];
                }
            }
        }
    }
    Ok((a, f))
}

fn with_patch(e: Error, k: usize) -> Error {
    match e {
        Error::Geometry { xi, eta, det, .. } => Error::Geometry { patch: k, xi, eta, det },
        other => other,
    }
}

/// Quadrature data on a boundary edge.
struct EdgePoint {
    x: [f64; 2],
    normal: [f64; 2],
    ds: f64,
    h_normal: f64,
    basis: LocalBasis,
    first: (usize, usize),
}

/// Calls `visit` at every quadrature point of every physical boundary side.
fn boundary_loop<F>(domain: &MultiPatchDomain, rule: &GaussRule, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &EdgePoint) -> Result<()>,
{
    let p = domain.degree();
    let n = (p + 1) * (p + 1);
    for &(k, side) in domain.boundary_sides() {
        let patch = &domain.patches()[k];
        let basis = domain.basis(k);
        let (edge_kv, normal_kv) = if side.along_xi() {
            (basis.basis_x(), basis.basis_y())
        } else {
            (basis.basis_y(), basis.basis_x())
        };
        let c = match side {
            Side::West | Side::South => normal_kv.first(),
            Side::East | Side::North => normal_kv.last(),
        };
        let (nfirst, nval, nder) = point_basis(normal_kv, c)?;
        let nspan = nfirst + normal_kv.degree();
        let nk = normal_kv.knots();
        let h_param = nk[nspan + 1] - nk[nspan];
        let nref = side.reference_normal();
        for t in element_tables(edge_kv, rule) {
            for q in 0..rule.len() {
                let s = t.points[q];
                let (xi, eta) = if side.along_xi() { (s, c) } else { (c, s) };
                let mp = map_point(patch, k, xi, eta).map_err(|e| with_patch(e, k))?;
                let col = if side.along_xi() { 0 } else { 1 };
                let tangent = mp.jac[0][col].hypot(mp.jac[1][col]);
                let mut nrm = [
                    mp.jinv[0][0] * nref[0] + mp.jinv[1][0] * nref[1],
                    mp.jinv[0][1] * nref[0] + mp.jinv[1][1] * nref[1],
                ];
                let len = nrm[0].hypot(nrm[1]);
                nrm = [nrm[0] / len, nrm[1] / len];
                let mut lb = LocalBasis::new(n);
                let a0 = q * (p + 1);
                let (ev, ed) = (&t.val[a0..a0 + p + 1], &t.der[a0..a0 + p + 1]);
                let first = if side.along_xi() {
                    lb.fill(ev, ed, &nval, &nder, &mp.jinv);
                    (t.first, nfirst)
                } else {
                    lb.fill(&nval, &nder, ev, ed, &mp.jinv);
                    (nfirst, t.first)
                };
                visit(
                    k,
                    &EdgePoint {
                        x: mp.x,
                        normal: nrm,
                        ds: t.weights[q] * tangent,
                        h_normal: h_param * mp.det / tangent,
                        basis: lb,
                        first,
                    },
                )?;
            }
        }
    }
    Ok(())
}

fn local_to_global_indices(domain: &MultiPatchDomain, k: usize, first: (usize, usize), out: &mut Vec<usize>) {
    let p = domain.degree();
    let b = domain.basis(k);
    let map = domain.local_to_global(k);
    out.clear();
    for j in 0..=p {
        for i in 0..=p {
            out.push(map[b.index(first.0 + i, first.1 + j)]);
        }
    }
}

/// Galerkin system with symmetric Nitsche imposition of the Dirichlet data.
pub fn assemble_problem(coefficients: &CdrCoefficients, domain: &MultiPatchDomain) -> Result<DiscreteProblem> {
    assemble_problem_with_penalty(coefficients, domain, nitsche_penalty(domain.degree()))
}

/// As [`assemble_problem`] with an explicit Nitsche constant `η` (the form uses `η / h`).
pub fn assemble_problem_with_penalty(
    coefficients: &CdrCoefficients,
    domain: &MultiPatchDomain,
    penalty: f64,
) -> Result<DiscreteProblem> {
    let p = domain.degree();
    let rule = GaussRule::new(p + 1);
    let c = coefficients;
    let d = c.diffusion;
    let v = c.velocity;
    let r = c.reaction;
    let source = &c.source;
    let n = (p + 1) * (p + 1);
    let (mut a, mut f) = volume_loop(domain, domain, &rule, true, |qp, mat, rhs| {
        let (t, u) = (qp.test, qp.trial);
        let fx = source(qp.x) * qp.wdet;
        for j in 0..n {
            let (dgx, dgy) = (
                d[0][0] * u.gx[j] + d[0][1] * u.gy[j],
                d[1][0] * u.gx[j] + d[1][1] * u.gy[j],
            );
            let conv = v[0] * u.gx[j] + v[1] * u.gy[j];
            let (sx, sy, s0) = (dgx * qp.wdet, dgy * qp.wdet, (conv + r * u.val[j]) * qp.wdet);
            for i in 0..n {
                mat[i * n + j] += sx * t.gx[i] + sy * t.gy[i] + s0 * t.val[i];
            }
        }
        for i in 0..n {
            rhs[i] += fx * t.val[i];
        }
    })?;

    let g = &c.dirichlet;
    let mut dofs = Vec::with_capacity(n);
    let mut flux = vec![0.0; n];
    boundary_loop(domain, &rule, |k, ep| {
        local_to_global_indices(domain, k, ep.first, &mut dofs);
        let b = &ep.basis;
        let nn = ep.normal;
        for i in 0..n {
            let dgx = d[0][0] * b.gx[i] + d[0][1] * b.gy[i];
            let dgy = d[1][0] * b.gx[i] + d[1][1] * b.gy[i];
            flux[i] = dgx * nn[0] + dgy * nn[1];
        }
        let sigma = penalty / ep.h_normal;
        let gv = g(ep.x);
        for i in 0..n {
            for j in 0..n {
                let val = -flux[j] * b.val[i] - flux[i] * b.val[j] + sigma * b.val[i] * b.val[j];
                a.add_to(dofs[i], dofs[j], ep.ds * val);
            }
            if gv != 0.0 {
                f[dofs[i]] += ep.ds * gv * (sigma * b.val[i] - flux[i]);
            }
        }
        Ok(())
    })?;
    Ok(DiscreteProblem {
        domain: domain.clone(),
        matrix: a,
        rhs: f,
        penalty,
    })
}

/// Benchmark system of degree `p` and knot spacing `2^-level`.
pub fn assemble_system(spec: &BenchmarkSpec, p: usize, level: u32) -> Result<DiscreteProblem> {
    if !(1..=5).contains(&p) || !(1..=9).contains(&level) {
        return Err(Error::Argument(format!(
            "degree {p} or level {level} outside the supported range (p 1..=5, level 1..=9)"
        )));
    }
    assemble_problem(&spec.coefficients, &spec.domain(p, level, 0)?)
}

/// Mass matrix `∫ φ_i φ_j dΩ`.
pub fn assemble_mass(domain: &MultiPatchDomain) -> Result<SparseMatrixCsr> {
    let p = domain.degree();
    let n = (p + 1) * (p + 1);
    let rule = GaussRule::new(p + 1);
    let (m, _) = volume_loop(domain, domain, &rule, false, |qp, mat, _| {
        for i in 0..n {
            let s = qp.test.val[i] * qp.wdet;
            for j in 0..n {
                mat[i * n + j] += s * qp.trial.val[j];
            }
        }
    })?;
    Ok(m)
}

/// Mixed mass matrix `∫ φ_{i,fine} φ_{j,coarse} dΩ` between two spaces on the same mesh.
pub fn assemble_transfer(fine: &MultiPatchDomain, coarse: &MultiPatchDomain) -> Result<SparseMatrixCsr> {
    let (pf, pc) = (fine.degree(), coarse.degree());
    let (nf, nc) = ((pf + 1) * (pf + 1), (pc + 1) * (pc + 1));
    let rule = GaussRule::new(pf.max(pc) + 1);
    let (m, _) = volume_loop(fine, coarse, &rule, false, |qp, mat, _| {
        for i in 0..nf {
            let s = qp.test.val[i] * qp.wdet;
            for j in 0..nc {
                mat[i * nc + j] += s * qp.trial.val[j];
            }
        }
    })?;
    Ok(m)
}

/// Row-sum lumped diagonal of a mass matrix.
pub fn lump_mass(m: &SparseMatrixCsr) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let d = m.row_sums();
    if let Some(row) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Lumping { row, value: d[row] });
    }
    Ok(d)
}

/// `‖u_h − u‖_{L²(Ω)}` with `p + 3` Gauss points per direction.
pub fn discretization_error(domain: &MultiPatchDomain, exact: &ScalarFn, u: &[f64]) -> Result<f64> {
    if u.len() != domain.global_ndof() {
        return Err(Error::Dimension {
            expected: domain.global_ndof(),
            found: u.len(),
        });
    }
    let p = domain.degree();
    let rule = GaussRule::new(p + 3);
    let mut total = 0.0;
    for (k, t) in patch_tables(domain, &rule).iter().enumerate() {
        let patch = &domain.patches()[k];
        let b = domain.basis(k);
        let map = domain.local_to_global(k);
        let mut sum = 0.0;
        for ty in &t.y {
            for tx in &t.x {
                for qy in 0..rule.len() {
                    for qx in 0..rule.len() {
                        let mp = map_point(patch, k, tx.points[qx], ty.points[qy]).map_err(|e| with_patch(e, k))?;
                        let mut uh = 0.0;
                        for bb in 0..=p {
                            let ny = ty.val[qy * (p + 1) + bb];
                            for a in 0..=p {
                                uh += u[map[b.index(tx.first + a, ty.first + bb)]] * tx.val[qx * (p + 1) + a] * ny;
                            }
                        }
                        let e = uh - exact(mp.x);
                        sum += e * e * tx.weights[qx] * ty.weights[qy] * mp.det;
                    }
                }
            }
        }
        total += sum;
    }
    Ok(total.sqrt())
}

/// `‖u_h − g‖_{L²(∂Ω)}`.
pub fn boundary_error(domain: &MultiPatchDomain, g: &ScalarFn, u: &[f64]) -> Result<f64> {
    if u.len() != domain.global_ndof() {
        return Err(Error::Dimension {
            expected: domain.global_ndof(),
            found: u.len(),
        });
    }
    let rule = GaussRule::new(domain.degree() + 3);
    let mut dofs = Vec::new();
    let mut sum = 0.0;
    boundary_loop(domain, &rule, |k, ep| {
        local_to_global_indices(domain, k, ep.first, &mut dofs);
        let uh: f64 = dofs.iter().zip(&ep.basis.val).map(|(&i, v)| u[i] * v).sum();
        let e = uh - g(ep.x);
        sum += e * e * ep.ds;
        Ok(())
    })?;
    Ok(sum.sqrt())
}

/// Tensor spline interpolant at the Greville points of every patch.
pub fn interpolate(domain: &MultiPatchDomain, func: &ScalarFn) -> Result<Vec<f64>> {
    let mut out = vec![0.0; domain.global_ndof()];
    for k in 0..domain.num_patches() {
        let b = domain.basis(k);
        let patch = &domain.patches()[k];
        let collocation = |kv: &KnotVector| -> Result<(Vec<f64>, nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>)> {
            let g = kv.greville();
            let mut c = DMatrix::zeros(g.len(), g.len());
            for (i, &x) in g.iter().enumerate() {
                let (first, v) = kv.eval_basis(x)?;
                for (a, &val) in v.iter().enumerate() {
                    c[(i, first + a)] = val;
                }
            }
            Ok((g, c.lu()))
        };
        let (gx, lx) = collocation(b.basis_x())?;
        let (gy, ly) = collocation(b.basis_y())?;
        let mut vals = DMatrix::zeros(gx.len(), gy.len());
        for (i, &x) in gx.iter().enumerate() {
            for (j, &y) in gy.iter().enumerate() {
                vals[(i, j)] = func(patch.eval(x, y)?.0);
            }
        }
        let singular = || Error::Analysis("singular collocation matrix".into());
        let tmp = lx.solve(&vals).ok_or_else(singular)?;
        let coef = ly.solve(&tmp.transpose()).ok_or_else(singular)?.transpose();
        let map = domain.local_to_global(k);
        for iy in 0..b.ny() {
            for ix in 0..b.nx() {
                out[map[b.index(ix, iy)]] = coef[(ix, iy)];
            }
        }
    }
    Ok(out)
}

/// Dense solve helper for small systems in tests and diagnostics.
pub fn dense_solve(a: &SparseMatrixCsr, f: &[f64]) -> Result<Vec<f64>> {
    a.to_dense()
        .lu()
        .solve(&DVector::from_column_slice(f))
        .map(|v| v.as_slice().to_vec())
        .ok_or_else(|| Error::Analysis("singular system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::benchmarks::Geometry;
    use crate::splines::TensorBasis2D;
    use std::sync::Arc;

    fn unit_domain(p: usize, spans: usize) -> MultiPatchDomain {
        MultiPatchDomain::single(GeometryPatch::unit_square(), TensorBasis2D::uniform(p, spans).unwrap()).unwrap()
    }

    #[test]
    fn single_element_bilinear_mass() {
        let m = assemble_mass(&unit_domain(1, 1)).unwrap().to_dense();
        let e = DMatrix::from_row_slice(4, 4, &[4., 2., 2., 1., 2., 4., 1., 2., 2., 1., 4., 2., 1., 2., 2., 4.]) / 36.0;
        assert!((m - e).abs().max() < 1e-15);
        let d = lump_mass(&assemble_mass(&unit_domain(1, 1)).unwrap()).unwrap();
        assert!(d.iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn lumping_cases() {
        assert_eq!(lump_mass(&SparseMatrixCsr::identity(3)).unwrap(), vec![1.0; 3]);
        let bad = SparseMatrixCsr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(matches!(lump_mass(&bad), Err(Error::Lumping { row: 1, .. })));
    }

    #[test]
    fn mass_sums_to_area() {
        for g in [Geometry::UnitSquare, Geometry::LShape] {
            for p in 1..=3 {
                let dom = MultiPatchDomain::new(g.patches(), TensorBasis2D::uniform(p, 4).unwrap()).unwrap();
                let m = assemble_mass(&dom).unwrap();
                assert!(m.values().iter().all(|&v| v >= -1e-15));
                let total: f64 = m.values().iter().sum();
                assert!((total - g.area()).abs() < 1e-10, "{g:?} p={p}: {total}");
                let lumped: f64 = lump_mass(&m).unwrap().iter().sum();
                assert!((lumped - total).abs() < 1e-12);
            }
        }
    }

    /// The annulus Jacobian is rational, so Gauss quadrature is only asymptotically exact.
    #[test]
    fn annulus_mass_sums_to_area() {
        let b1 = BenchmarkSpec::new(1).unwrap();
        let area = Geometry::QuarterAnnulus.area();
        let err = |p, l| {
            let m = assemble_mass(&b1.domain(p, l, 0).unwrap()).unwrap();
            (m.values().iter().sum::<f64>() - area).abs()
        };
        for p in 2..=4 {
            assert!(err(p, 4) < 1e-10);
        }
        // Quadrature error of order h^(2p+2) for p = 1.
        let rate = (err(1, 3) / err(1, 4)).log2();
        assert!((rate - 4.0).abs() < 0.2, "{rate}");
    }

    #[test]
    fn annulus_mass_is_spd() {
        let b1 = BenchmarkSpec::new(1).unwrap();
        let m = assemble_mass(&b1.domain(2, 4, 0).unwrap()).unwrap().to_dense();
        assert!((&m - m.transpose()).abs().max() < 1e-15);
        assert!(m.cholesky().is_some());
    }

    #[test]
    fn transfer_against_high_order_oracle() {
        let fine = unit_domain(2, 1);
        let coarse = unit_domain(1, 1);
        let p = assemble_transfer(&fine, &coarse).unwrap();
        assert_eq!((p.nrows(), p.ncols()), (9, 4));
        let oracle = GaussRule::new(20);
        let (kf, kc) = (KnotVector::open_uniform(2, 1).unwrap(), KnotVector::open_uniform(1, 1).unwrap());
        for i in 0..9 {
            for j in 0..4 {
                let mut s = 0.0;
                for (x, wx) in oracle.points.iter().zip(&oracle.weights) {
                    for (y, wy) in oracle.points.iter().zip(&oracle.weights) {
                        let fi = kf.basis_function(i % 3, *x).unwrap() * kf.basis_function(i / 3, *y).unwrap();
                        let cj = kc.basis_function(j % 2, *x).unwrap() * kc.basis_function(j / 2, *y).unwrap();
                        s += wx * wy * fi * cj;
                    }
                }
                assert!((p.get(i, j) - s).abs() < 1e-14);
            }
        }
        assert_eq!(p.spmv(&[0.0; 4]).unwrap(), vec![0.0; 9]);
    }

    #[test]
    fn transfer_preserves_constants() {
        let b1 = BenchmarkSpec::new(1).unwrap();
        for (pf, pc) in [(2, 1), (3, 2), (4, 3)] {
            let fine = b1.domain(pf, 3, 0).unwrap();
            let coarse = b1.domain(pc, 3, 0).unwrap();
            let mf = assemble_mass(&fine).unwrap();
            let p = assemble_transfer(&fine, &coarse).unwrap();
            let ones = p.spmv(&vec![1.0; coarse.global_ndof()]).unwrap();
            let rows = mf.row_sums();
            let lumped = lump_mass(&mf).unwrap();
            for i in 0..ones.len() {
                assert!((ones[i] - rows[i]).abs() < 1e-12);
                assert!((ones[i] / lumped[i] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mismatched_meshes_rejected() {
        assert!(matches!(
            assemble_transfer(&unit_domain(2, 4), &unit_domain(1, 2)),
            Err(Error::Assembly(_))
        ));
    }

    #[test]
    fn benchmark_two_reaction_rows() {
        let b2 = BenchmarkSpec::new(2).unwrap();
        let dom = b2.domain(1, 2, 0).unwrap();
        let with_r = assemble_problem(&b2.coefficients, &dom).unwrap();
        assert_eq!((with_r.matrix.nrows(), with_r.matrix.ncols()), (25, 25));
        let mut c = b2.coefficients.clone();
        c.reaction = 0.0;
        let without = assemble_problem(&c, &dom).unwrap();
        let reaction = with_r.matrix.add_scaled(-1.0, &without.matrix).unwrap();
        let integrals = assemble_mass(&dom).unwrap().row_sums();
        for (s, m) in reaction.row_sums().iter().zip(&integrals) {
            assert!((s - 0.3 * m).abs() < 1e-14);
        }
    }

    #[test]
    fn benchmark_one_is_symmetric() {
        let b1 = BenchmarkSpec::new(1).unwrap();
        for (p, l) in [(1, 2), (2, 3), (3, 3), (4, 2)] {
            let a = assemble_system(&b1, p, l).unwrap().matrix;
            let asym = a.add_scaled(-1.0, &a.transpose()).unwrap().max_abs();
            assert!(asym < 1e-10 * a.max_abs(), "p={p}: {asym}");
        }
    }

    #[test]
    fn interpolation_converges_at_optimal_rate() {
        let b2 = BenchmarkSpec::new(2).unwrap();
        let errors: Vec<f64> = (3..=5)
            .map(|l| {
                let dom = b2.domain(2, l, 0).unwrap();
                let u = interpolate(&dom, &b2.exact).unwrap();
                discretization_error(&dom, &b2.exact, &u).unwrap()
            })
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio.log2() - 3.0).abs() < 0.3, "ratio {ratio}");
        }
        let zero: ScalarFn = Arc::new(|_| 0.0);
        let dom = b2.domain(2, 2, 0).unwrap();
        assert_eq!(discretization_error(&dom, &zero, &vec![0.0; dom.global_ndof()]).unwrap(), 0.0);
    }

    #[test]
    fn solved_problems_converge() {
        for id in [1u8, 2] {
            let spec = BenchmarkSpec::new(id).unwrap();
            let p = 2;
            let errors: Vec<f64> = (2..=4)
                .map(|l| {
                    let prob = assemble_system(&spec, p, l).unwrap();
                    let u = dense_solve(&prob.matrix, &prob.rhs).unwrap();
                    discretization_error(&prob.domain, &spec.exact, &u).unwrap()
                })
                .collect();
            let rate = (errors[1] / errors[2]).log2();
            assert!((rate - 3.0).abs() < 0.3, "benchmark {id}: errors {errors:?}");
        }
    }

    #[test]
    fn inhomogeneous_data_is_imposed() {
        let b3 = BenchmarkSpec::new(3).unwrap();
        let errs: Vec<f64> = (2..=4)
            .map(|l| {
                let prob = assemble_system(&b3, 2, l).unwrap();
                let u = dense_solve(&prob.matrix, &prob.rhs).unwrap();
                discretization_error(&prob.domain, &b3.exact, &u).unwrap()
            })
            .collect();
        // Corner singularity limits the rate to about 4/3.
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
        assert!((errs[1] / errs[2]).log2() > 1.0);
    }
}
