use crate::discretization::{
    assemble_mass, assemble_problem_with_penalty, assemble_transfer, lump_mass, nitsche_penalty, BenchmarkSpec,
    CdrCoefficients,
};
use crate::error::{Error, Result};
use crate::sparselin::SparseMatrixCsr;
use crate::splines::MultiPatchDomain;
use std::sync::Arc;
use std::time::Instant;

/// How coarse p-level operators are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoarseOperator {
    #[default]
    Rediscretize,
    /// `A_{k-1} = I^{k-1}_k A_k I^k_{k-1}`.
    Galerkin,
}

/// Assembled data of one p-level.
#[derive(Debug, Clone)]
pub struct OperatorLevel {
    pub degree: usize,
    pub domain: MultiPatchDomain,
    pub matrix: Arc<SparseMatrixCsr>,
    pub lumped_mass: Vec<f64>,
    /// `diag(M^L_k)^{-1} P^k_{k-1}`, present for `k ≥ 2`.
    pub prolongation: Option<SparseMatrixCsr>,
    /// `diag(M^L_{k-1})^{-1} (P^k_{k-1})ᵀ`, present for `k ≥ 2`.
    pub restriction: Option<SparseMatrixCsr>,
}

/// One degree-1 level of the nested h-hierarchy below the p=1 level.
#[derive(Debug, Clone)]
pub struct HLevel {
    pub level: u32,
    pub matrix: Arc<SparseMatrixCsr>,
    /// Linear interpolation from this level to the next finer one.
    pub prolongation: SparseMatrixCsr,
    /// Transpose of `prolongation`.
    pub restriction: SparseMatrixCsr,
}

/// Everything a hierarchy needs that does not depend on the smoother.
#[derive(Debug, Clone)]
pub struct PmgOperators {
    pub benchmark: u8,
    pub level: u32,
    /// Index `k - 1` holds degree `k`.
    pub levels: Vec<OperatorLevel>,
    /// From the level just below `h` down to the coarsest mesh.
    pub h_levels: Vec<HLevel>,
    pub rhs: Vec<f64>,
    pub coarse_operator: CoarseOperator,
    pub assembly_seconds: f64,
}

/// Options for operator assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Each original patch is cut into `2^split × 2^split` patches.
    pub split: u32,
    pub coarse_operator: CoarseOperator,
    /// Coarsest h-level exponent of the p=1 h-multigrid.
    pub coarsest_level: u32,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            split: 0,
            coarse_operator: CoarseOperator::Rediscretize,
            coarsest_level: 2,
        }
    }
}

impl PmgOperators {
    pub fn degree(&self) -> usize {
        self.levels.len()
    }

    pub fn top(&self) -> &OperatorLevel {
        self.levels.last().expect("at least one level")
    }

    pub fn level(&self, k: usize) -> &OperatorLevel {
        &self.levels[k - 1]
    }

    pub fn ndof(&self) -> usize {
        self.top().matrix.nrows()
    }
}

/// Assembles the p-levels `1..=p` at mesh width `2^-level` and the h-levels at degree 1.
pub fn assemble_operators(
    spec: &BenchmarkSpec,
    p: usize,
    level: u32,
    opts: &AssemblyOptions,
) -> Result<PmgOperators> {
    assemble_operators_for(&spec.coefficients, spec.id, |k, l| spec.domain(k, l, opts.split), p, level, opts)
}

/// Generic variant taking the coefficients and a `(degree, level) → domain` factory.
pub fn assemble_operators_for<D>(
    coefficients: &CdrCoefficients,
    benchmark: u8,
    domain_at: D,
    p: usize,
    level: u32,
    opts: &AssemblyOptions,
) -> Result<PmgOperators>
where
    D: Fn(usize, u32) -> Result<MultiPatchDomain>,
{
    if p == 0 {
        return Err(Error::Argument("p-multigrid needs degree p >= 1".into()));
    }
    let start = Instant::now();
    let tag = |k: usize| format!("p={k}");
    let mut levels: Vec<OperatorLevel> = Vec::with_capacity(p);
    let mut rhs = Vec::new();
    for k in 1..=p {
        let domain = domain_at(k, level).map_err(|e| e.at_level(tag(k)))?;
        let problem = assemble_problem_with_penalty(coefficients, &domain, nitsche_penalty(k))
            .map_err(|e| e.at_level(tag(k)))?;
        let lumped = lump_mass(&assemble_mass(&domain).map_err(|e| e.at_level(tag(k)))?)
            .map_err(|e| e.at_level(tag(k)))?;
        let (prolongation, restriction) = if k >= 2 {
            let coarse = &levels[k - 2];
            let t = assemble_transfer(&domain, &coarse.domain).map_err(|e| e.at_level(tag(k)))?;
            let inv_fine: Vec<f64> = lumped.iter().map(|m| 1.0 / m).collect();
            let inv_coarse: Vec<f64> = coarse.lumped_mass.iter().map(|m| 1.0 / m).collect();
            (Some(t.scale_rows(&inv_fine)), Some(t.transpose().scale_rows(&inv_coarse)))
        } else {
            (None, None)
        };
        if k == p {
            rhs = problem.rhs;
        }
        levels.push(OperatorLevel {
            degree: k,
            domain,
            matrix: Arc::new(problem.matrix),
            lumped_mass: lumped,
            prolongation,
            restriction,
        });
    }

    if opts.coarse_operator == CoarseOperator::Galerkin {
        for k in (2..=p).rev() {
            let a = galerkin_projection(&levels[k - 1])?;
            levels[k - 2].matrix = Arc::new(a);
        }
    }

    let coarsest = opts.coarsest_level.max(opts.split).min(level);
    let mut h_levels = Vec::new();
    let mut finer = levels[0].domain.clone();
    for l in (coarsest..level).rev() {
        let tagl = || format!("p=1 h=2^-{l}");
        let domain = domain_at(1, l).map_err(|e| e.at_level(tagl()))?;
        let problem = assemble_problem_with_penalty(coefficients, &domain, nitsche_penalty(1))
            .map_err(|e| e.at_level(tagl()))?;
        let prolongation = linear_interpolation(&finer, &domain).map_err(|e| e.at_level(tagl()))?;
        h_levels.push(HLevel {
            level: l,
            matrix: Arc::new(problem.matrix),
            restriction: prolongation.transpose(),
            prolongation,
        });
        finer = domain;
    }

    Ok(PmgOperators {
        benchmark,
        level,
        levels,
        h_levels,
        rhs,
        coarse_operator: opts.coarse_operator,
        assembly_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `I^{k-1}_k A_k I^k_{k-1}` for the level holding degree `k`.
pub fn galerkin_projection(level: &OperatorLevel) -> Result<SparseMatrixCsr> {
    let (p, r) = match (&level.prolongation, &level.restriction) {
        (Some(p), Some(r)) => (p, r),
        _ => return Err(Error::Argument("Galerkin projection needs a level with k >= 2".into())),
    };
    r.matmul(&level.matrix.matmul(p)?)
}

/// Nodal embedding of a degree-1 space with mesh width `2h` into the one with width `h`.
pub fn linear_interpolation(fine: &MultiPatchDomain, coarse: &MultiPatchDomain) -> Result<SparseMatrixCsr> {
    if fine.degree() != 1 || coarse.degree() != 1 || fine.num_patches() != coarse.num_patches() {
        return Err(Error::Assembly("linear interpolation needs matching degree-1 spaces".into()));
    }
    let weights_1d = |nf: usize, nc: usize| -> Result<Vec<Vec<(usize, f64)>>> {
        // nf − 1 = 2 (nc − 1) spans.
        if nf < 2 || nf - 1 != 2 * (nc - 1) {
            return Err(Error::Assembly(format!(
                "meshes are not nested by one uniform refinement ({nf} vs {nc} functions)"
            )));
        }
        Ok((0..nf)
            .map(|i| {
                if i % 2 == 0 {
                    vec![(i / 2, 1.0)]
                } else {
                    vec![((i - 1) / 2, 0.5), ((i + 1) / 2, 0.5)]
                }
            })
            .collect())
    };
    let mut triplets = Vec::new();
    let mut per_patch = Vec::with_capacity(fine.num_patches());
    for k in 0..fine.num_patches() {
        let (bf, bc) = (fine.basis(k), coarse.basis(k));
        per_patch.push((weights_1d(bf.nx(), bc.nx())?, weights_1d(bf.ny(), bc.ny())?));
    }
    for (g, &(k, local)) in fine.representatives().iter().enumerate() {
        let (bf, bc) = (fine.basis(k), coarse.basis(k));
        let (ix, iy) = bf.split_index(local);
        let map = coarse.local_to_global(k);
        let (wx, wy) = &per_patch[k];
        for &(jy, vy) in &wy[iy] {
            for &(jx, vx) in &wx[ix] {
                triplets.push((g, map[bc.index(jx, jy)], vx * vy));
            }
        }
    }
    SparseMatrixCsr::from_triplets(fine.global_ndof(), coarse.global_ndof(), &triplets)
}
