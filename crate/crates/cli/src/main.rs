use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use iga_pmg::{parse_config, run, to_markdown, write_outputs, RunOptions};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "iga-pmg", version, about = "p-multigrid benchmarks for B-spline discretizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write results.csv, results.md and residual histories.
    Run(Common),
    /// Run a sweep and print the markdown table.
    Table(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` per line).
    config: PathBuf,
    /// Output directory; overrides the `output` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the random initial guess.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent cells (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write every system matrix and right-hand side in MatrixMarket format.
    #[arg(long)]
    dump_matrices: bool,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (common, print) = match cli.command {
        Command::Run(c) => (c, false),
        Command::Table(c) => (c, true),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let config = parse_config(&text).with_context(|| format!("in {}", common.config.display()))?;
    let out = common.out.unwrap_or_else(|| config.output.clone());
    let opts = RunOptions {
        seed: common.seed,
        dump_matrices: common.dump_matrices.then(|| out.join("matrices")),
    };
    let table = run(&config, &opts)?;
    if print {
        print!("{}", to_markdown(&table));
    } else {
        write_outputs(&table, &out)?;
        eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
    }
    Ok(())
}
