use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use rka_core::estimation::EstimatorKind;
use rka_harness::checks;
use rka_harness::experiments::{run_fig1, run_fig2, run_fig3_table3, run_fig4, run_fig5};
use rka_harness::spec::{ExperimentSpec, SEED_ENV};
use rka_harness::ResultTable;

#[derive(Parser)]
#[command(
    name = "rka-sim",
    version,
    about = "Randomized Kaczmarz receive-combining experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample-probability CDFs.
    Fig1(Common),
    /// SE versus iteration budget, HYBRID and PLAIN against RZF.
    Fig2(Common),
    /// Gap curves for every estimator, plus the iteration-count table.
    Fig3(Common),
    /// Gap surfaces over antenna correlation and shadowing.
    Fig4(Common),
    /// Iteration bounds, trade-off thresholds and saving ratios.
    Fig5(Common),
    /// Iteration counts to reach each gap tolerance, LS only.
    Table3(Common),
    /// Runs every pass/fail criterion and prints a JSON summary.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Use the full Monte Carlo budgets instead of the reduced ones.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Channel realizations per drop.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    drops: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(p) => ExperimentSpec::load(p)?,
            None => ExperimentSpec::default(),
        };
        spec.resolve_seed(self.seed)?;
        if let Some(out) = &self.out {
            spec.output_dir = out.clone();
        }
        if let Some(n) = self.trials {
            spec.trials.realizations = n;
        }
        if let Some(n) = self.drops {
            spec.trials.drops = n;
        }
        spec.validate()?;
        if let Some(n) = self.threads {
            if n == 0 {
                bail!("--threads must be positive");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
        Ok(spec)
    }
}

fn write(spec: &ExperimentSpec, tables: &[ResultTable]) -> Result<()> {
    for t in tables {
        let path = t.write(&spec.output_dir, spec)?;
        println!("wrote {} ({} rows)", path.display(), t.rows.len());
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fig1(c) => {
            let spec = c.spec()?;
            write(&spec, &[run_fig1(&spec)?])
        }
        Command::Fig2(c) => {
            let spec = c.spec()?;
            write(&spec, &[run_fig2(&spec)?])
        }
        Command::Fig3(c) => {
            let spec = c.spec()?;
            let (fig3, table3) = run_fig3_table3(&spec, &spec.sweep.estimators)?;
            write(&spec, &[fig3, table3])
        }
        Command::Table3(c) => {
            let spec = c.spec()?;
            let (fig3, table3) = run_fig3_table3(&spec, &[EstimatorKind::Ls])?;
            write(&spec, &[fig3, table3])
        }
        Command::Fig4(c) => {
            let spec = c.spec()?;
            write(&spec, &[run_fig4(&spec)?])
        }
        Command::Fig5(c) => {
            let spec = c.spec()?;
            write(&spec, &run_fig5(&spec)?)
        }
        Command::Validate { common, full } => {
            let spec = common.spec()?;
            let seed = spec.seed()?;
            let results = checks::run_all(seed, !full);
            for r in &results {
                eprintln!("{}", r.line());
            }
            let pass = results.iter().all(|r| r.pass);
            let summary = serde_json::json!({
                "seed": seed,
                "mode": if full { "full" } else { "quick" },
                "pass": pass,
                "checks": results,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if !pass {
                std::process::exit(1);
            }
            Ok(())
        }
    }
}
