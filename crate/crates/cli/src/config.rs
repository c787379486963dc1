//! Flat `key = value` run configurations. Lists are comma separated, `#` starts a comment.

use crate::error::{CliError, Result};
use iga_core::pmg::{CoarseOperator, CycleType, SmootherKind};
use iga_core::sparselin::Ordering;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Standalone,
    Bicgstab,
    Spectrum,
    Reduction,
    Condition,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Standalone => "standalone",
            Mode::Bicgstab => "bicgstab",
            Mode::Spectrum => "spectrum",
            Mode::Reduction => "reduction",
            Mode::Condition => "condition",
        }
    }
}

pub fn smoother_name(s: SmootherKind) -> &'static str {
    match s {
        SmootherKind::Ilut => "ilut",
        SmootherKind::GaussSeidel => "gs",
    }
}

pub fn coarse_operator_name(c: CoarseOperator) -> &'static str {
    match c {
        CoarseOperator::Rediscretize => "rediscretize",
        CoarseOperator::Galerkin => "galerkin",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: u8,
    pub p: Vec<usize>,
    /// Mesh widths as exponents: `h = 2^-e`.
    pub h: Vec<u32>,
    pub smoothers: Vec<SmootherKind>,
    pub nu1: usize,
    pub nu2: usize,
    pub cycle: CycleType,
    pub mode: Mode,
    pub tau: f64,
    pub fillfactor: f64,
    pub ordering: Ordering,
    /// Each patch is split into `2^split × 2^split` patches.
    pub split: u32,
    pub coarse_operators: Vec<CoarseOperator>,
    pub seed: u64,
    pub tol: f64,
    pub max_cycles: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            benchmark: 1,
            p: vec![2],
            h: vec![6],
            smoothers: vec![SmootherKind::Ilut],
            nu1: 1,
            nu2: 1,
            cycle: CycleType::V,
            mode: Mode::Standalone,
            tau: 1e-12,
            fillfactor: 1.0,
            ordering: Ordering::Rcm,
            split: 0,
            coarse_operators: vec![CoarseOperator::Rediscretize],
            seed: 42,
            tol: 1e-8,
            max_cycles: 200,
            output: PathBuf::from("results"),
        }
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn fail(&self, message: impl Into<String>) -> CliError {
        CliError::Config {
            line: self.line,
            key: self.key.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.trim().parse().map_err(|_| self.fail(format!("cannot parse `{}`", s.trim())))
    }

    fn list<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        let items: Vec<T> = self
            .value
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| self.parse(s))
            .collect::<Result<_>>()?;
        if items.is_empty() {
            return Err(self.fail("empty list"));
        }
        Ok(items)
    }

    fn names<T>(&self, pick: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
        self.value
            .split(',')
            .map(|s| {
                let s = s.trim().to_ascii_lowercase();
                pick(&s).ok_or_else(|| self.fail(format!("unknown value `{s}`")))
            })
            .collect()
    }

    fn name<T>(&self, pick: impl Fn(&str) -> Option<T>) -> Result<T> {
        let mut v = self.names(pick)?;
        if v.len() != 1 {
            return Err(self.fail("expected a single value"));
        }
        Ok(v.remove(0))
    }

    fn in_range<T: PartialOrd + std::fmt::Display + Copy>(&self, v: T, lo: T, hi: T) -> Result<T> {
        if v < lo || v > hi {
            return Err(self.fail(format!("{v} outside [{lo}, {hi}]")));
        }
        Ok(v)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        let e = Entry {
            line: i + 1,
            key: key.trim(),
            value: value.trim(),
        };
        match e.key {
            "benchmark" => c.benchmark = e.in_range(e.parse(e.value)?, 1, 3)?,
            "p" => {
                c.p = e.list()?;
                for &p in &c.p {
                    e.in_range(p, 1, 5)?;
                }
            }
            "h" => {
                c.h = e.list()?;
                for &h in &c.h {
                    e.in_range(h, 1, 9)?;
                }
            }
            "smoother" => {
                c.smoothers = e.names(|s| match s {
                    "ilut" => Some(SmootherKind::Ilut),
                    "gs" | "gauss-seidel" | "gauss_seidel" => Some(SmootherKind::GaussSeidel),
                    _ => None,
                })?
            }
            "nu1" => c.nu1 = e.in_range(e.parse(e.value)?, 0, 100)?,
            "nu2" => c.nu2 = e.in_range(e.parse(e.value)?, 0, 100)?,
            "cycle" => {
                c.cycle = e.name(|s| match s {
                    "v" => Some(CycleType::V),
                    "w" => Some(CycleType::W),
                    _ => None,
                })?
            }
            "mode" => {
                c.mode = e.name(|s| match s {
                    "standalone" => Some(Mode::Standalone),
                    "bicgstab" => Some(Mode::Bicgstab),
                    "spectrum" => Some(Mode::Spectrum),
                    "reduction" => Some(Mode::Reduction),
                    "condition" => Some(Mode::Condition),
                    _ => None,
                })?
            }
            "tau" => c.tau = e.in_range(e.parse(e.value)?, 0.0, 1.0)?,
            "fillfactor" => c.fillfactor = e.in_range(e.parse(e.value)?, 1.0, 1e6)?,
            "ordering" => {
                c.ordering = e.name(|s| match s {
                    "none" | "natural" => Some(Ordering::None),
                    "rcm" => Some(Ordering::Rcm),
                    _ => None,
                })?
            }
            "split" => c.split = e.in_range(e.parse(e.value)?, 0, 4)?,
            "coarse_operator" => {
                c.coarse_operators = e.names(|s| match s {
                    "rediscretize" | "rd" => Some(CoarseOperator::Rediscretize),
                    "galerkin" | "g" => Some(CoarseOperator::Galerkin),
                    _ => None,
                })?
            }
            "seed" => c.seed = e.parse(e.value)?,
            "tol" => c.tol = e.in_range(e.parse(e.value)?, 1e-16, 1.0)?,
            "max_cycles" => c.max_cycles = e.in_range(e.parse(e.value)?, 1, 100_000)?,
            "output" => c.output = PathBuf::from(e.value),
            _ => return Err(e.fail("unknown key")),
        }
    }
    if let Some(&h) = c.h.iter().find(|&&h| h < c.split) {
        return Err(CliError::Config {
            line: 0,
            key: "split".into(),
            message: format!("split {} exceeds refinement h = 2^-{h}", c.split),
        });
    }
    Ok(c)
}
