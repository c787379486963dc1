//! Executes a configured sweep cell by cell.

use crate::config::{coarse_operator_name, smoother_name, Mode, RunConfig};
use crate::error::{io_error, Result};
use iga_core::analysis::{
    condition_number, eigenvalue_csv, estimate_spectral_radius, generalized_eigs, iteration_matrix, laplace_operators,
    reduction_csv, reduction_profiles, spectral_radius, DENSE_LIMIT, ITERATION_MATRIX_LIMIT,
};
use iga_core::discretization::{assemble_mass, BenchmarkSpec};
use iga_core::pmg::{
    assemble_operators, seeded_initial_guess, AssemblyOptions, CoarseOperator, PmgHierarchy, PmgOperators,
    PmgOptions, SmootherKind,
};
use iga_core::sparselin::{bicgstab, mmio};
use rayon::prelude::*;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

/// Power steps used for ρ when the iteration matrix is too large to form.
const POWER_STEPS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Converged,
    Diverged,
    /// Iteration budget exhausted without reaching the tolerance.
    NotConverged,
    Breakdown,
    /// Analysis modes: value computed.
    Ok,
    Failed(String),
}

impl Status {
    pub fn label(&self) -> String {
        match self {
            Status::Converged => "converged".into(),
            Status::Diverged => "diverged".into(),
            Status::NotConverged => "max_cycles".into(),
            Status::Breakdown => "breakdown".into(),
            Status::Ok => "ok".into(),
            Status::Failed(msg) => format!("error: {}", msg.replace([',', '\n'], ";")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResultRow {
    pub benchmark: u8,
    pub p: usize,
    pub h_exp: u32,
    /// Smoother name, or the coarse operator name in condition mode.
    pub variant: String,
    pub mode: Mode,
    pub value: Option<f64>,
    pub status: Status,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub residuals: Vec<f64>,
    /// Extra CSV artifact (eigenvalue cloud or reduction profile).
    pub artifact: Option<String>,
}

impl ResultRow {
    fn new(c: &RunConfig, p: usize, h_exp: u32, variant: &str) -> Self {
        Self {
            benchmark: c.benchmark,
            p,
            h_exp,
            variant: variant.to_string(),
            mode: c.mode,
            value: None,
            status: Status::Failed("not run".into()),
            setup_seconds: 0.0,
            solve_seconds: 0.0,
            residuals: Vec::new(),
            artifact: None,
        }
    }

    fn failed(mut self, err: impl std::fmt::Display) -> Self {
        self.status = Status::Failed(err.to_string());
        self
    }

    /// File-name stem identifying the cell.
    pub fn cell(&self) -> String {
        format!(
            "b{}_p{}_h{}_{}_{}",
            self.benchmark,
            self.p,
            self.h_exp,
            self.variant,
            self.mode.name()
        )
    }

    /// Value as printed in tables: `-` for diverged or unconverged solves.
    pub fn display_value(&self) -> String {
        match (&self.status, self.value) {
            (Status::Converged, Some(v)) => format!("{v:.0}"),
            (Status::Ok, Some(v)) => match self.mode {
                Mode::Condition => format!("{v:.2e}"),
                _ => format!("{v:.3}"),
            },
            _ => "-".into(),
        }
    }
}

/// Rows ordered by `(p, h)` then variant, matching the configuration order.
#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Overrides applied on top of a configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Write `A` and the right-hand side of every cell in MatrixMarket format here.
    pub dump_matrices: Option<std::path::PathBuf>,
}

pub fn pmg_options(c: &RunConfig, smoother: SmootherKind) -> PmgOptions {
    PmgOptions {
        smoother,
        cycle: c.cycle,
        nu1: c.nu1,
        nu2: c.nu2,
        tau: c.tau,
        fillfactor: c.fillfactor,
        ordering: c.ordering,
    }
}

pub fn assembly_options(c: &RunConfig, coarse_operator: CoarseOperator) -> AssemblyOptions {
    AssemblyOptions {
        split: c.split,
        coarse_operator,
        ..Default::default()
    }
}

/// Runs every `(p, h)` cell of the sweep; failures are recorded in their rows.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<ResultTable> {
    let mut c = config.clone();
    if let Some(seed) = opts.seed {
        c.seed = seed;
    }
    let spec = BenchmarkSpec::new(c.benchmark)?;
    let cells: Vec<(usize, u32)> = c.p.iter().flat_map(|&p| c.h.iter().map(move |&h| (p, h))).collect();
    let rows: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(p, h)| run_cell(&c, &spec, p, h, opts))
        .collect();
    Ok(ResultTable {
        rows: rows.into_iter().flatten().collect(),
    })
}

fn run_cell(c: &RunConfig, spec: &BenchmarkSpec, p: usize, h: u32, opts: &RunOptions) -> Vec<ResultRow> {
    match c.mode {
        Mode::Standalone | Mode::Bicgstab => {
            let ops = match assemble_operators(spec, p, h, &assembly_options(c, CoarseOperator::Rediscretize)) {
                Ok(ops) => Arc::new(ops),
                Err(e) => return failed_rows(c, p, h, e),
            };
            if let Some(dir) = &opts.dump_matrices {
                if let Err(e) = dump(dir, c.benchmark, p, h, &ops) {
                    return failed_rows(c, p, h, e);
                }
            }
            c.smoothers.iter().map(|&s| solve_cell(c, &ops, p, h, s)).collect()
        }
        Mode::Spectrum | Mode::Reduction => {
            let ops = match laplace_operators(c.benchmark, p, h, &assembly_options(c, CoarseOperator::Rediscretize)) {
                Ok(ops) => Arc::new(ops),
                Err(e) => return failed_rows(c, p, h, e),
            };
            c.smoothers
                .iter()
                .map(|&s| {
                    let row = ResultRow::new(c, p, h, smoother_name(s));
                    let start = Instant::now();
                    let hier = match PmgHierarchy::new(ops.clone(), pmg_options(c, s)) {
                        Ok(hier) => hier,
                        Err(e) => return row.failed(e),
                    };
                    let setup = start.elapsed().as_secs_f64() + ops.assembly_seconds;
                    let out = if c.mode == Mode::Spectrum {
                        spectrum_cell(row, &hier)
                    } else {
                        reduction_cell(row, &hier)
                    };
                    ResultRow {
                        setup_seconds: setup,
                        ..out
                    }
                })
                .collect()
        }
        Mode::Condition => c
            .coarse_operators
            .iter()
            .map(|&co| {
                let row = ResultRow::new(c, p, h, coarse_operator_name(co));
                if p < 2 {
                    return row.failed("condition mode needs p >= 2");
                }
                let start = Instant::now();
                let ops = match assemble_operators(spec, p, h, &assembly_options(c, co)) {
                    Ok(ops) => ops,
                    Err(e) => return row.failed(e),
                };
                let setup_seconds = start.elapsed().as_secs_f64();
                let start = Instant::now();
                match condition_number(&ops.level(p - 1).matrix) {
                    Ok(k) => ResultRow {
                        value: Some(k),
                        status: Status::Ok,
                        setup_seconds,
                        solve_seconds: start.elapsed().as_secs_f64(),
                        ..row
                    },
                    Err(e) => row.failed(e),
                }
            })
            .collect(),
    }
}

fn failed_rows(c: &RunConfig, p: usize, h: u32, err: impl std::fmt::Display) -> Vec<ResultRow> {
    c.smoothers
        .iter()
        .map(|&s| ResultRow::new(c, p, h, smoother_name(s)).failed(&err))
        .collect()
}

fn dump(dir: &Path, b: u8, p: usize, h: u32, ops: &PmgOperators) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    mmio::write_matrix(&dir.join(format!("A_b{b}_p{p}_h{h}.mtx")), &ops.top().matrix)?;
    mmio::write_vector(&dir.join(format!("rhs_b{b}_p{p}_h{h}.mtx")), &ops.rhs)?;
    Ok(())
}

/// One stand-alone or BiCGSTAB solve from the seeded random guess.
pub fn solve_cell(c: &RunConfig, ops: &Arc<PmgOperators>, p: usize, h: u32, s: SmootherKind) -> ResultRow {
    let row = ResultRow::new(c, p, h, smoother_name(s));
    let start = Instant::now();
    let hier = match PmgHierarchy::new(ops.clone(), pmg_options(c, s)) {
        Ok(hier) => hier,
        Err(e) => return row.failed(e),
    };
    let setup_seconds = ops.assembly_seconds + start.elapsed().as_secs_f64();
    let u0 = seeded_initial_guess(hier.ndof(), c.seed);
    let start = Instant::now();
    let row = match c.mode {
        Mode::Bicgstab => match bicgstab(hier.matrix(), hier.rhs(), &u0, &hier.as_preconditioner(), c.tol, c.max_cycles) {
            Ok((_, rep)) => ResultRow {
                value: Some(rep.iterations as f64),
                status: if rep.converged {
                    Status::Converged
                } else if rep.breakdown {
                    Status::Breakdown
                } else if rep.residual_history.iter().any(|r| !r.is_finite()) {
                    Status::Diverged
                } else {
                    Status::NotConverged
                },
                residuals: rep.residual_history,
                ..row
            },
            Err(e) => row.failed(e),
        },
        _ => match hier.solve(hier.rhs(), &u0, c.tol, c.max_cycles) {
            Ok((_, rep)) => ResultRow {
                value: Some(rep.cycles as f64),
                status: if rep.converged {
                    Status::Converged
                } else if rep.diverged {
                    Status::Diverged
                } else {
                    Status::NotConverged
                },
                residuals: rep.residual_history,
                ..row
            },
            Err(e) => row.failed(e),
        },
    };
    ResultRow {
        setup_seconds,
        solve_seconds: start.elapsed().as_secs_f64(),
        ..row
    }
}

fn spectrum_cell(row: ResultRow, hier: &PmgHierarchy) -> ResultRow {
    let start = Instant::now();
    let (rho, artifact) = if hier.ndof() <= ITERATION_MATRIX_LIMIT {
        match iteration_matrix(hier).and_then(|t| spectral_radius(&t)) {
            Ok(rep) => (rep.spectral_radius, Some(eigenvalue_csv(&rep))),
            Err(e) => return row.failed(e),
        }
    } else {
        (estimate_spectral_radius(hier, POWER_STEPS, 1), None)
    };
    ResultRow {
        value: Some(rho),
        status: Status::Ok,
        solve_seconds: start.elapsed().as_secs_f64(),
        artifact,
        ..row
    }
}

fn reduction_cell(row: ResultRow, hier: &PmgHierarchy) -> ResultRow {
    let start = Instant::now();
    if hier.ndof() > DENSE_LIMIT {
        return row.failed(format!("reduction mode limited to {DENSE_LIMIT} unknowns"));
    }
    let top = hier.operators().top();
    let profiles = assemble_mass(&top.domain)
        .and_then(|m| generalized_eigs(&top.matrix, &m))
        .and_then(|eigs| reduction_profiles(hier, &eigs));
    match profiles {
        Ok(prof) => {
            // Largest smoother factor over the upper half of the spectrum.
            let worst = prof[prof.len() / 2..].iter().map(|r| r.smoother).fold(0.0, f64::max);
            ResultRow {
                value: Some(worst),
                status: Status::Ok,
                solve_seconds: start.elapsed().as_secs_f64(),
                artifact: Some(reduction_csv(&prof)),
                ..row
            }
        }
        Err(e) => row.failed(e),
    }
}
