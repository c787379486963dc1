//! CSV, markdown and residual-history output.

use crate::error::{io_error, Result};
use crate::runner::{ResultRow, ResultTable};
use std::fmt::Write;
use std::path::Path;

pub const CSV_HEADER: &str = "benchmark,p,h_exp,smoother,mode,value,status,setup_s,solve_s";

/// One line per row. Without `timing` the two time columns are left empty,
/// which makes the output byte-identical across reruns.
pub fn to_csv(table: &ResultTable, timing: bool) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in &table.rows {
        let (setup, solve) = if timing {
            (format!("{:.3}", r.setup_seconds), format!("{:.3}", r.solve_seconds))
        } else {
            (String::new(), String::new())
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.benchmark,
            r.p,
            r.h_exp,
            r.variant,
            r.mode.name(),
            r.display_value(),
            r.status.label(),
            setup,
            solve
        );
    }
    out
}

/// Paper-style table: one row per mesh width, one column per `(p, variant)`.
pub fn to_markdown(table: &ResultTable) -> String {
    let mut out = String::new();
    let mut groups: Vec<(u8, &str)> = Vec::new();
    for r in &table.rows {
        let key = (r.benchmark, r.mode.name());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (b, mode) in groups {
        let rows: Vec<&ResultRow> = table
            .rows
            .iter()
            .filter(|r| r.benchmark == b && r.mode.name() == mode)
            .collect();
        let mut columns: Vec<(usize, &str)> = Vec::new();
        let mut hs: Vec<u32> = Vec::new();
        for r in &rows {
            if !columns.contains(&(r.p, r.variant.as_str())) {
                columns.push((r.p, r.variant.as_str()));
            }
            if !hs.contains(&r.h_exp) {
                hs.push(r.h_exp);
            }
        }
        hs.sort_unstable();
        let _ = writeln!(out, "### Benchmark {b}, {mode}\n");
        out.push_str("| h |");
        for (p, v) in &columns {
            let _ = write!(out, " p={p} {v} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(columns.len()));
        out.push('\n');
        for h in hs {
            let _ = write!(out, "| 2^-{h} |");
            for (p, v) in &columns {
                let cell = rows
                    .iter()
                    .find(|r| r.h_exp == h && r.p == *p && r.variant == *v)
                    .map(|r| r.display_value())
                    .unwrap_or_default();
                let _ = write!(out, " {cell} |");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Writes `results.csv`, `results.md`, one `residuals_<cell>.txt` per solve and
/// the per-cell CSV artifacts of the analysis modes.
pub fn write_outputs(table: &ResultTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    let write = |name: String, text: &str| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_error(&path))
    };
    write("results.csv".into(), &to_csv(table, true))?;
    write("results.md".into(), &to_markdown(table))?;
    for r in &table.rows {
        if !r.residuals.is_empty() {
            let text: String = r.residuals.iter().map(|v| format!("{v:.6e}\n")).collect();
            write(format!("residuals_{}.txt", r.cell()), &text)?;
        }
        if let Some(a) = &r.artifact {
            write(format!("{}.csv", r.cell()), a)?;
        }
    }
    Ok(())
}
