use super::operators::{assemble_operators, AssemblyOptions, PmgOperators};
use crate::discretization::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::sparselin::{ilut_factorize, DenseLu, GaussSeidel, IlutFactorization, LinearOperator, Ordering, SparseMatrixCsr};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmootherKind {
    #[default]
    Ilut,
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleType {
    #[default]
    V,
    W,
}

/// Smoother and cycle parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmgOptions {
    pub smoother: SmootherKind,
    pub cycle: CycleType,
    pub nu1: usize,
    pub nu2: usize,
    pub tau: f64,
    pub fillfactor: f64,
    pub ordering: Ordering,
}

impl Default for PmgOptions {
    fn default() -> Self {
        Self {
            smoother: SmootherKind::Ilut,
            cycle: CycleType::V,
            nu1: 1,
            nu2: 1,
            tau: 1e-12,
            fillfactor: 1.0,
            ordering: Ordering::Rcm,
        }
    }
}

/// Smoother bound to one operator.
#[derive(Debug, Clone)]
pub enum Smoother {
    Ilut(IlutFactorization),
    GaussSeidel(GaussSeidel),
}

impl Smoother {
    pub fn new(kind: SmootherKind, a: &SparseMatrixCsr, opts: &PmgOptions) -> Result<Self> {
        Ok(match kind {
            SmootherKind::Ilut => Smoother::Ilut(ilut_factorize(a, opts.tau, opts.fillfactor, opts.ordering)?),
            SmootherKind::GaussSeidel => Smoother::GaussSeidel(GaussSeidel::new(a)?),
        })
    }

    /// One step `u ← u + S (f − A u)`.
    pub fn smooth(&self, a: &SparseMatrixCsr, u: &mut [f64], f: &[f64], work: &mut Work) {
        match self {
            Smoother::Ilut(lu) => {
                let n = u.len();
                work.ensure(n);
                a.residual_into(f, u, &mut work.r[..n]);
                lu.apply_into(&work.r[..n], &mut work.e[..n], &mut work.t[..n]);
                for (ui, ei) in u.iter_mut().zip(&work.e[..n]) {
                    *ui += ei;
                }
            }
            Smoother::GaussSeidel(gs) => gs.forward(a, u, f),
        }
    }
}

/// Scratch buffers reused by smoothing steps.
#[derive(Debug, Default)]
pub struct Work {
    r: Vec<f64>,
    e: Vec<f64>,
    t: Vec<f64>,
}

impl Work {
    fn ensure(&mut self, n: usize) {
        if self.r.len() < n {
            self.r.resize(n, 0.0);
            self.e.resize(n, 0.0);
            self.t.resize(n, 0.0);
        }
    }
}

/// h-multigrid at degree 1: ILUT-smoothed V-cycles over nested meshes with a
/// dense direct solve on the coarsest one.
#[derive(Debug, Clone)]
pub struct HmgHierarchy {
    /// Finest first.
    matrices: Vec<Arc<SparseMatrixCsr>>,
    smoothers: Vec<Smoother>,
    /// `prolongations[j]` maps level `j + 1` to level `j`.
    prolongations: Vec<SparseMatrixCsr>,
    restrictions: Vec<SparseMatrixCsr>,
    coarse: DenseLu,
    nu1: usize,
    nu2: usize,
}

impl HmgHierarchy {
    pub fn new(ops: &PmgOperators, opts: &PmgOptions) -> Result<Self> {
        let mut matrices = vec![ops.level(1).matrix.clone()];
        matrices.extend(ops.h_levels.iter().map(|l| l.matrix.clone()));
        let ilut = PmgOptions {
            smoother: SmootherKind::Ilut,
            ..*opts
        };
        let last = matrices.len() - 1;
        let mut smoothers = Vec::with_capacity(last);
        for (j, a) in matrices[..last].iter().enumerate() {
            smoothers.push(Smoother::new(SmootherKind::Ilut, a, &ilut).map_err(|e| e.at_level(format!("h-level {j}")))?);
        }
        let coarse = DenseLu::new(&matrices[last]).map_err(|e| e.at_level("coarsest h-level"))?;
        Ok(Self {
            matrices,
            smoothers,
            prolongations: ops.h_levels.iter().map(|l| l.prolongation.clone()).collect(),
            restrictions: ops.h_levels.iter().map(|l| l.restriction.clone()).collect(),
            coarse,
            nu1: opts.nu1,
            nu2: opts.nu2,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.matrices.len()
    }

    /// One V-cycle on the finest level.
    pub fn vcycle(&self, u: &mut [f64], f: &[f64], work: &mut Work) {
        self.vcycle_at(0, u, f, work);
    }

    fn vcycle_at(&self, j: usize, u: &mut [f64], f: &[f64], work: &mut Work) {
        let a = &self.matrices[j];
        if j + 1 == self.matrices.len() {
            u.copy_from_slice(&self.coarse.solve(f));
            return;
        }
        for _ in 0..self.nu1 {
            self.smoothers[j].smooth(a, u, f, work);
        }
        let r = a.residual(f, u);
        let rc = self.restrictions[j].spmv(&r).expect("conforming");
        let mut ec = vec![0.0; rc.len()];
        self.vcycle_at(j + 1, &mut ec, &rc, work);
        let e = self.prolongations[j].spmv(&ec).expect("conforming");
        for (ui, ei) in u.iter_mut().zip(&e) {
            *ui += ei;
        }
        for _ in 0..self.nu2 {
            self.smoothers[j].smooth(a, u, f, work);
        }
    }
}

/// Outcome of a stand-alone multigrid solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub cycles: usize,
    /// `‖f − A u_k‖ / ‖f − A u_0‖`, starting with 1.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

/// Relative residual above which a solve is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e10;

/// p-multigrid hierarchy over degrees `1..=p` at a fixed mesh.
#[derive(Debug, Clone)]
pub struct PmgHierarchy {
    ops: Arc<PmgOperators>,
    /// Index `k - 2` holds the smoother of degree `k ≥ 2`.
    smoothers: Vec<Smoother>,
    hmg: HmgHierarchy,
    options: PmgOptions,
    setup_seconds: f64,
}

impl PmgHierarchy {
    /// Factorizes smoothers on already assembled operators.
    pub fn new(ops: Arc<PmgOperators>, options: PmgOptions) -> Result<Self> {
        let start = Instant::now();
        let mut smoothers = Vec::new();
        for k in 2..=ops.degree() {
            smoothers.push(
                Smoother::new(options.smoother, &ops.level(k).matrix, &options)
                    .map_err(|e| e.at_level(format!("p={k}")))?,
            );
        }
        let hmg = HmgHierarchy::new(&ops, &options).map_err(|e| e.at_level("p=1"))?;
        let setup_seconds = ops.assembly_seconds + start.elapsed().as_secs_f64();
        Ok(Self {
            ops,
            smoothers,
            hmg,
            options,
            setup_seconds,
        })
    }

    pub fn operators(&self) -> &Arc<PmgOperators> {
        &self.ops
    }

    pub fn options(&self) -> &PmgOptions {
        &self.options
    }

    pub fn degree(&self) -> usize {
        self.ops.degree()
    }

    pub fn ndof(&self) -> usize {
        self.ops.ndof()
    }

    pub fn matrix(&self) -> &SparseMatrixCsr {
        &self.ops.top().matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.ops.rhs
    }

    pub fn hmg(&self) -> &HmgHierarchy {
        &self.hmg
    }

    pub fn setup_seconds(&self) -> f64 {
        self.setup_seconds
    }

    /// `diag(M^L_k)^{-1} P^k_{k-1} v`.
    pub fn prolongate(&self, k: usize, v: &[f64]) -> Result<Vec<f64>> {
        self.transfer(k, v, true)
    }

    /// `diag(M^L_{k-1})^{-1} (P^k_{k-1})ᵀ r`.
    pub fn restrict(&self, k: usize, r: &[f64]) -> Result<Vec<f64>> {
        self.transfer(k, r, false)
    }

    fn transfer(&self, k: usize, v: &[f64], up: bool) -> Result<Vec<f64>> {
        if k < 2 || k > self.degree() {
            return Err(Error::Argument(format!("no transfer into level {k}")));
        }
        let l = self.ops.level(k);
        let m = if up { &l.prolongation } else { &l.restriction };
        m.as_ref().expect("k >= 2").spmv(v)
    }

    /// One smoothing step at the top level.
    pub fn smooth(&self, u: &mut [f64], f: &[f64]) {
        let p = self.degree();
        let mut work = Work::default();
        if p == 1 {
            match self.hmg.smoothers.first() {
                Some(s) => s.smooth(self.matrix(), u, f, &mut work),
                None => u.copy_from_slice(&self.hmg.coarse.solve(f)),
            }
        } else {
            self.smoothers[p - 2].smooth(self.matrix(), u, f, &mut work);
        }
    }

    /// One cycle at the top level, updating `u` in place.
    pub fn cycle(&self, u: &mut [f64], f: &[f64]) {
        let mut work = Work::default();
        self.cycle_at(self.degree(), u, f, &mut work);
    }

    fn cycle_at(&self, k: usize, u: &mut [f64], f: &[f64], work: &mut Work) {
        if k == 1 {
            self.hmg.vcycle(u, f, work);
            return;
        }
        let level = self.ops.level(k);
        let a = &level.matrix;
        let smoother = &self.smoothers[k - 2];
        for _ in 0..self.options.nu1 {
            smoother.smooth(a, u, f, work);
        }
        let r = a.residual(f, u);
        let rc = level.restriction.as_ref().expect("k >= 2").spmv(&r).expect("conforming");
        let mut ec = vec![0.0; rc.len()];
        let visits = if k - 1 == 1 || self.options.cycle == CycleType::V { 1 } else { 2 };
        for _ in 0..visits {
            self.cycle_at(k - 1, &mut ec, &rc, work);
        }
        let e = level.prolongation.as_ref().expect("k >= 2").spmv(&ec).expect("conforming");
        for (ui, ei) in u.iter_mut().zip(&e) {
            *ui += ei;
        }
        for _ in 0..self.options.nu2 {
            smoother.smooth(a, u, f, work);
        }
    }

    /// Repeats cycles until the relative residual drops below `tol`, exceeds the
    /// divergence threshold, or `max_cycles` is reached.
    pub fn solve(&self, f: &[f64], u0: &[f64], tol: f64, max_cycles: usize) -> Result<(Vec<f64>, SolveReport)> {
        let n = self.ndof();
        if f.len() != n || u0.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: f.len().min(u0.len()),
            });
        }
        let start = Instant::now();
        let a = self.matrix();
        let mut u = u0.to_vec();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r0 = norm(&a.residual(f, &u));
        let mut report = SolveReport {
            cycles: 0,
            residual_history: vec![1.0],
            converged: r0 == 0.0,
            diverged: false,
            setup_seconds: self.setup_seconds,
            solve_seconds: 0.0,
        };
        let mut work = Work::default();
        while !report.converged && report.cycles < max_cycles {
            self.cycle_at(self.degree(), &mut u, f, &mut work);
            report.cycles += 1;
            let rel = norm(&a.residual(f, &u)) / r0;
            report.residual_history.push(rel);
            if !(rel <= DIVERGENCE_THRESHOLD) {
                report.diverged = true;
                break;
            }
            report.converged = rel <= tol;
        }
        report.solve_seconds = start.elapsed().as_secs_f64();
        Ok((u, report))
    }

    /// The fixed linear map `r ↦ one cycle from a zero guess with right-hand side r`.
    pub fn as_preconditioner(&self) -> PmgPreconditioner<'_> {
        PmgPreconditioner { hierarchy: self }
    }
}

/// One multigrid cycle used as a preconditioner.
#[derive(Debug, Clone, Copy)]
pub struct PmgPreconditioner<'a> {
    hierarchy: &'a PmgHierarchy,
}

impl LinearOperator for PmgPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.hierarchy.ndof()
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.hierarchy.cycle(y, x);
    }
}

/// Assembles operators for a benchmark and builds the hierarchy in one go.
pub fn build_hierarchy(
    spec: &BenchmarkSpec,
    p: usize,
    level: u32,
    assembly: &AssemblyOptions,
    options: PmgOptions,
) -> Result<PmgHierarchy> {
    let ops = assemble_operators(spec, p, level, assembly)?;
    PmgHierarchy::new(Arc::new(ops), options)
}

/// Uniform samples on `[−1, 1)`: a splitmix64 stream from `seed`, each output
/// `z` mapped to `(z >> 11)·2⁻⁵³·2 − 1` so the sequence is reproducible anywhere.
pub fn seeded_initial_guess(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}
