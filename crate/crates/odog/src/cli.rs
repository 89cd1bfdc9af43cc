use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_seeds, parse_values, ExperimentConfig, OptimizerKind, SweepAxis, SweepSection};
use crate::error::CliError;
use crate::experiment::{run_experiment, sweep, Report};

#[derive(Debug, Parser)]
#[command(name = "odog", version, about = "Run and sweep ODOG optimizer experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration for every seed.
    Run(CommonArgs),
    /// Run a configuration across values of one axis.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        axis: Option<SweepAxis>,
        /// Comma-separated values for the axis.
        #[arg(long)]
        values: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerKind>,
    /// Bundled problem; resets problem parameters to their defaults.
    #[arg(long)]
    pub problem: Option<String>,
    /// Gradient noise level.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Total gradient budget M.
    #[arg(long)]
    pub budget: Option<usize>,
    /// `0,1,2` or `0..30`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Derive D, T and the step size from the problem constants.
    #[arg(long)]
    pub auto_params: bool,
    /// Check the regret and stationarity bounds and write bounds.csv.
    #[arg(long)]
    pub verify: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parallel runs.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.problem {
            if *name != cfg.problem.name {
                cfg.problem.name = name.clone();
                cfg.problem.params.clear();
            }
        }
        if let Some(k) = self.optimizer {
            cfg.optimizer.kind = k;
        }
        if let Some(s) = self.sigma {
            cfg.run.sigma = s;
        }
        if let Some(m) = self.budget {
            cfg.run.budget = m;
        }
        if let Some(s) = &self.seeds {
            cfg.run.seeds = parse_seeds(s)?;
        }
        cfg.run.auto_params |= self.auto_params;
        cfg.run.verify |= self.verify;
        if let Some(o) = &self.out {
            cfg.run.out = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.run.workers = w;
        }
        Ok(cfg)
    }
}

fn print_bounds(report: &Report) {
    if report.bounds.is_empty() {
        return;
    }
    println!("{:<28} {:>6} {:>8} {:>14} {:>14}  ok", "check", "seed", "episode", "lhs", "rhs");
    for b in &report.bounds {
        println!(
            "{:<28} {:>6} {:>8} {:>14.6e} {:>14.6e}  {}",
            b.name,
            b.seed.map(|s| s.to_string()).unwrap_or_else(|| "all".into()),
            b.episode.map(|k| k.to_string()).unwrap_or_default(),
            b.lhs,
            b.rhs,
            if b.satisfied { "yes" } else { "NO" }
        );
    }
}

pub fn execute(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Run(args) => run_experiment(&args.resolve()?),
        Command::Sweep { common, axis, values } => {
            let mut cfg = common.resolve()?;
            match (axis, values) {
                (Some(axis), Some(v)) => {
                    cfg.sweep = Some(SweepSection {
                        axis,
                        values: parse_values(axis, &v)?,
                    })
                }
                (None, None) => {}
                _ => return Err(CliError::Config("--axis and --values go together".into())),
            }
            sweep(&cfg)
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(report) => {
            print_bounds(&report);
            println!("{} run(s) written", report.summary.len());
            match report.status() {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("odog: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("odog: {e}");
            e.exit_code()
        }
    }
}
