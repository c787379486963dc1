use super::eigen::{GeneralizedEigenSystem, SpectralReport};
use crate::discretization::{BenchmarkSpec, CdrCoefficients, ScalarFn};
use crate::error::{Error, Result};
use crate::pmg::{assemble_operators_for, seeded_initial_guess, AssemblyOptions, PmgHierarchy, PmgOperators};
use crate::sparselin::DenseLu;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::fmt::Write;
use std::sync::Arc;

/// Largest dimension for which the iteration matrix is formed explicitly.
pub const ITERATION_MATRIX_LIMIT: usize = 2500;

/// Operators of `−Δu = 0` with homogeneous Dirichlet data on the geometry of a benchmark.
pub fn laplace_operators(benchmark: u8, p: usize, level: u32, opts: &AssemblyOptions) -> Result<PmgOperators> {
    let spec = BenchmarkSpec::new(benchmark)?;
    let zero: ScalarFn = Arc::new(|_| 0.0);
    let coefficients = CdrCoefficients::new([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0, zero.clone(), zero)?;
    assemble_operators_for(&coefficients, benchmark, |k, l| spec.domain(k, l, opts.split), p, level, opts)
}

/// Which part of a cycle a reduction factor measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Smoother,
    CoarseGridCorrection,
}

/// Per-mode error reduction `‖S v_j‖ / ‖v_j‖` and `‖CGC v_j‖ / ‖v_j‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionProfile {
    /// 1-based, ascending eigenvalue order.
    pub mode: usize,
    pub eigenvalue: f64,
    pub smoother: f64,
    pub cgc: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One reduction factor per eigenvector, applying a single smoothing step or a
/// single coarse-grid correction (exact solve on degree `p − 1`) with `f = 0`.
pub fn reduction_factors(h: &PmgHierarchy, eigs: &GeneralizedEigenSystem, which: Reduction) -> Result<Vec<f64>> {
    let n = h.ndof();
    if eigs.eigenvectors.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            found: eigs.eigenvectors.nrows(),
        });
    }
    let zero = vec![0.0; n];
    match which {
        Reduction::Smoother => Ok((0..eigs.len())
            .into_par_iter()
            .map(|j| {
                let mut u = eigs.vector(j);
                let before = norm(&u);
                h.smooth(&mut u, &zero);
                norm(&u) / before
            })
            .collect()),
        Reduction::CoarseGridCorrection => {
            let p = h.degree();
            if p < 2 {
                return Err(Error::Analysis("coarse-grid correction needs p >= 2".into()));
            }
            let coarse = DenseLu::new(&h.operators().level(p - 1).matrix)?;
            let a = h.matrix();
            (0..eigs.len())
                .into_par_iter()
                .map(|j| {
                    let mut u = eigs.vector(j);
                    let before = norm(&u);
                    let rc = h.restrict(p, &a.residual(&zero, &u))?;
                    let e = h.prolongate(p, &coarse.solve(&rc))?;
                    u.iter_mut().zip(&e).for_each(|(ui, ei)| *ui += ei);
                    Ok(norm(&u) / before)
                })
                .collect()
        }
    }
}

/// Smoother and coarse-grid factors for all modes.
pub fn reduction_profiles(h: &PmgHierarchy, eigs: &GeneralizedEigenSystem) -> Result<Vec<ReductionProfile>> {
    let s = reduction_factors(h, eigs, Reduction::Smoother)?;
    let c = reduction_factors(h, eigs, Reduction::CoarseGridCorrection)?;
    Ok((0..eigs.len())
        .map(|j| ReductionProfile {
            mode: j + 1,
            eigenvalue: eigs.eigenvalues[j],
            smoother: s[j],
            cgc: c[j],
        })
        .collect())
}

/// Explicit error propagator: column `i` is one cycle applied to `e_i` with `f = 0`.
pub fn iteration_matrix(h: &PmgHierarchy) -> Result<DMatrix<f64>> {
    let n = h.ndof();
    if n > ITERATION_MATRIX_LIMIT {
        return Err(Error::Analysis(format!(
            "iteration matrix limited to {ITERATION_MATRIX_LIMIT} unknowns, got {n}"
        )));
    }
    let zero = vec![0.0; n];
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut u = vec![0.0; n];
            u[i] = 1.0;
            h.cycle(&mut u, &zero);
            u
        })
        .collect();
    let mut t = DMatrix::zeros(n, n);
    for (i, c) in columns.iter().enumerate() {
        t.column_mut(i).copy_from_slice(c);
    }
    Ok(t)
}

/// Matrix-free estimate of ρ: geometric mean of the per-cycle error growth over
/// the second half of `iterations` power steps from a seeded random error.
pub fn estimate_spectral_radius(h: &PmgHierarchy, iterations: usize, seed: u64) -> f64 {
    let n = h.ndof();
    let zero = vec![0.0; n];
    let mut e = seeded_initial_guess(n, seed);
    let s = norm(&e);
    e.iter_mut().for_each(|v| *v /= s);
    let skip = iterations / 2;
    let mut log_sum = 0.0;
    for it in 0..iterations {
        h.cycle(&mut e, &zero);
        let g = norm(&e);
        if g == 0.0 {
            return 0.0;
        }
        if !g.is_finite() {
            return f64::INFINITY;
        }
        e.iter_mut().for_each(|v| *v /= g);
        if it >= skip {
            log_sum += g.ln();
        }
    }
    (log_sum / (iterations - skip).max(1) as f64).exp()
}

/// `mode,eigenvalue,r_smoother,r_cgc` rows.
pub fn reduction_csv(profiles: &[ReductionProfile]) -> String {
    let mut out = String::from("mode,eigenvalue,r_smoother,r_cgc\n");
    for r in profiles {
        let _ = writeln!(out, "{},{:.10e},{:.10e},{:.10e}", r.mode, r.eigenvalue, r.smoother, r.cgc);
    }
    out
}

/// `re,im` rows of an eigenvalue cloud.
pub fn eigenvalue_csv(report: &SpectralReport) -> String {
    let mut out = String::from("re,im\n");
    for z in &report.eigenvalues {
        let _ = writeln!(out, "{:.10e},{:.10e}", z.re, z.im);
    }
    out
}
