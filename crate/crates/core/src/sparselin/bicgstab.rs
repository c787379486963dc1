use super::csr::SparseMatrixCsr;
use super::ilut::IlutFactorization;
use crate::error::{Error, Result};

/// A fixed linear map `y = K x` on vectors of length [`dim`](Self::dim).
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_to(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrixCsr {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
}

impl LinearOperator for IlutFactorization {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        let mut work = vec![0.0; x.len()];
        self.apply_into(x, y, &mut work);
    }
}

/// `K = I`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Outcome of a Krylov solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// `‖r_k‖ / ‖r_0‖`, starting with 1.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub breakdown: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned BiCGSTAB for `A u = f` from the initial guess `u0`.
///
/// Stops once `‖f − A u‖ ≤ tol · ‖f − A u0‖`; one iteration is one full step
/// with two preconditioner applications.
pub fn bicgstab(
    a: &SparseMatrixCsr,
    f: &[f64],
    u0: &[f64],
    precond: &dyn LinearOperator,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, KrylovReport)> {
    let n = a.nrows();
    if a.ncols() != n || f.len() != n || u0.len() != n || precond.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            found: f.len().min(u0.len()).min(precond.dim()),
        });
    }
    let mut u = u0.to_vec();
    let mut r = a.residual(f, &u);
    let r0_norm = norm(&r);
    let mut report = KrylovReport {
        iterations: 0,
        residual_history: vec![1.0],
        converged: false,
        breakdown: false,
    };
    if r0_norm == 0.0 {
        report.converged = true;
        return Ok((u, report));
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let tiny = f64::EPSILON * f64::EPSILON;

    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= tiny * r0_norm * r0_norm {
            report.breakdown = true;
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply_to(&p, &mut y);
        a.spmv_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            report.breakdown = true;
            break;
        }
        alpha = rho_new / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        report.iterations = it;
        let s_rel = norm(&s) / r0_norm;
        if s_rel <= tol {
            for i in 0..n {
                u[i] += alpha * y[i];
            }
            r.copy_from_slice(&s);
            report.residual_history.push(s_rel);
            report.converged = true;
            break;
        }
        precond.apply_to(&s, &mut z);
        a.spmv_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            u[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm(&r) / r0_norm;
        report.residual_history.push(rel);
        if rel <= tol {
            report.converged = true;
            break;
        }
        if !rel.is_finite() || omega.abs() <= f64::EPSILON * 1e-3 {
            report.breakdown = true;
            break;
        }
        rho = rho_new;
    }
    Ok((u, report))
}
