use crate::error::{Error, Result};
use crate::sparselin::SparseMatrixCsr;
use nalgebra::{Complex, DMatrix, DVector};

const EIG_EPS: f64 = 1e-14;
const EIG_MAX_ITER: usize = 10_000;

/// Largest dimension handled by the dense eigen and SVD paths.
pub const DENSE_LIMIT: usize = 5000;

/// Eigenpairs of `A v = λ M v` with `λ` ascending and unit 2-norm vectors.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl GeneralizedEigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    /// `max_i ‖A v_i − λ_i M v_i‖ / (‖A‖ ‖v_i‖)` with the Frobenius norm of `A`.
    pub fn max_residual(&self, a: &SparseMatrixCsr, m: &SparseMatrixCsr) -> f64 {
        let anorm = a.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        (0..self.len())
            .map(|i| {
                let v = self.vector(i);
                let av = a.spmv(&v).expect("square");
                let mv = m.spmv(&v).expect("square");
                let r: f64 = av
                    .iter()
                    .zip(&mv)
                    .map(|(x, y)| (x - self.eigenvalues[i] * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                r / anorm
            })
            .fold(0.0, f64::max)
    }
}

fn check_dense(a: &SparseMatrixCsr) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.nrows() > DENSE_LIMIT {
        return Err(Error::Analysis(format!(
            "dense path limited to {DENSE_LIMIT} unknowns, got {}",
            a.nrows()
        )));
    }
    Ok(())
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    (a - a.transpose()).amax() <= 1e-10 * scale
}

/// Dense generalized eigendecomposition through the Cholesky factor of `M`.
/// `A` must be symmetric; nonsymmetric problems are rejected.
pub fn generalized_eigs(a: &SparseMatrixCsr, m: &SparseMatrixCsr) -> Result<GeneralizedEigenSystem> {
    check_dense(a)?;
    check_dense(m)?;
    if a.nrows() != m.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: m.nrows(),
        });
    }
    let ad = a.to_dense();
    if !is_symmetric(&ad) {
        return Err(Error::Analysis("generalized eigenvectors need a symmetric A".into()));
    }
    let chol = m
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::Analysis("mass matrix is not symmetric positive definite".into()))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let x = l
        .solve_lower_triangular(&ad)
        .ok_or_else(|| Error::Analysis("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Analysis("singular Cholesky factor".into()))?;
    let c = 0.5 * (&c + c.transpose());
    let eig = c
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Analysis("symmetric eigensolver did not converge".into()))?;
    let vt = l
        .transpose()
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or_else(|| Error::Analysis("singular Cholesky factor".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = order.len();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = vt.column(i);
        vectors.set_column(col, &(v / v.norm()));
    }
    Ok(GeneralizedEigenSystem {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: vectors,
    })
}

/// Complex eigenvalues of a square dense matrix and their largest modulus.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex<f64>>,
    pub spectral_radius: f64,
}

pub fn spectral_radius(t: &DMatrix<f64>) -> Result<SpectralReport> {
    if !t.is_square() {
        return Err(Error::Dimension {
            expected: t.nrows(),
            found: t.ncols(),
        });
    }
    if t.nrows() == 0 {
        return Ok(SpectralReport {
            eigenvalues: Vec::new(),
            spectral_radius: 0.0,
        });
    }
    let schur = t
        .clone()
        .try_schur(EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Analysis("Schur iteration did not converge".into()))?;
    let eigenvalues: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectralReport {
        eigenvalues,
        spectral_radius,
    })
}

/// `σ_max / σ_min` from a dense SVD.
pub fn condition_number(a: &SparseMatrixCsr) -> Result<f64> {
    check_dense(a)?;
    let svd = a
        .to_dense()
        .try_svd(false, false, EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Analysis("SVD did not converge".into()))?;
    let s: &DVector<f64> = &svd.singular_values;
    let (max, min) = (s.max(), s.min());
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SparseMatrixCsr {
        SparseMatrixCsr::from_diagonal(d)
    }

    #[test]
    fn trivial_pencils() {
        let m = SparseMatrixCsr::from_dense(&DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]));
        let e = generalized_eigs(&m, &m).unwrap();
        assert!(e.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));

        let e = generalized_eigs(&diag(&[2.0, 1.0]), &SparseMatrixCsr::identity(2)).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert!((e.eigenvectors[(1, 0)].abs() - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(0, 1)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = diag(&[1.0, -1.0]);
        assert!(matches!(generalized_eigs(&diag(&[1.0, 2.0]), &m), Err(Error::Analysis(_))));
        let a = SparseMatrixCsr::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]));
        assert!(generalized_eigs(&a, &SparseMatrixCsr::identity(2)).is_err());
        assert!(generalized_eigs(&diag(&[1.0]), &SparseMatrixCsr::identity(2)).is_err());
    }

    #[test]
    fn spectral_radius_of_simple_matrices() {
        assert_eq!(spectral_radius(&DMatrix::zeros(4, 4)).unwrap().spectral_radius, 0.0);
        // Rotation scaled by 0.5: eigenvalues ±0.5 i.
        let r = spectral_radius(&DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0])).unwrap();
        assert!((r.spectral_radius - 0.5).abs() < 1e-14);
        assert!(r.eigenvalues.iter().all(|z| z.re.abs() < 1e-14));
        assert!(spectral_radius(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn condition_numbers() {
        assert!((condition_number(&SparseMatrixCsr::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        assert!((condition_number(&diag(&[1.0, 10.0])).unwrap() - 10.0).abs() < 1e-12);
    }
}
