use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fdran_core::harness::{self, AlgorithmSet, Format, RunConfig, Table};
use log::info;

#[derive(Parser)]
#[command(name = "fdran", version, about = "Uplink FD-RAN energy-efficiency simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every drop and write one record per drop and algorithm.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the empirical EE CDF of each algorithm.
        #[arg(long)]
        cdf: Option<PathBuf>,
    },
    /// Run the configured sweep and write per-point aggregates.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write the raw records.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Compare algorithms with the exhaustive search on tiny drops.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Parse and validate a configuration, then print it normalized.
    ValidateConfig {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; the bundled defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithm selectors, or `all`.
    #[arg(long)]
    algorithm: Option<AlgorithmSet>,
    #[arg(long)]
    drops: Option<usize>,
    /// Base seed; drop `d` uses `seed ^ d`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Record per-algorithm wall time.
    #[arg(long)]
    wall_time: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::defaults(),
        };
        if let Some(a) = &self.algorithm {
            cfg.algorithm = a.clone();
        }
        if let Some(d) = self.drops {
            cfg.drops = d;
        }
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        cfg.record_wall_time |= self.wall_time;
        cfg.validate()?;
        Ok(cfg)
    }

    fn write<T: Table>(&self, rows: &[T]) -> Result<()> {
        write_to(self.out.as_deref(), rows, self.format)
    }
}

fn write_to<T: Table>(path: Option<&Path>, rows: &[T], format: Format) -> Result<()> {
    match path {
        Some(p) => harness::emit(rows, format, p).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            harness::write_table(rows, format, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, cdf } => {
            let cfg = common.config()?;
            info!("running {} drops of {}", cfg.drops, cfg.algorithm);
            let recs = harness::run(&cfg)?;
            common.write(&recs)?;
            if let Some(p) = cdf {
                write_to(Some(&p), &harness::ee_cdf(&recs), common.format)?;
            }
        }
        Command::Sweep { common, records } => {
            let cfg = common.config()?;
            anyhow::ensure!(cfg.sweep.is_some(), "the configuration has no `sweep` section");
            let recs = harness::run(&cfg)?;
            common.write(&harness::aggregate(&recs))?;
            if let Some(p) = records {
                write_to(Some(&p), &recs, common.format)?;
            }
        }
        Command::OracleCheck { common } => {
            let mut cfg = common.config()?;
            if common.algorithm.is_none() {
                cfg.algorithm = "trimsm-slmdb,recp".parse()?;
            }
            let rows = harness::oracle_check(&cfg)?;
            common.write(&rows)?;
            let ratios: Vec<f64> = rows.iter().filter(|r| r.feasible && r.exhaustive_feasible).map(|r| r.ratio).collect();
            if let Some(m) = harness::median(&ratios) {
                eprintln!("median EE ratio to exhaustive over {} feasible rows: {m:.4}", ratios.len());
            }
        }
        Command::ValidateConfig { common } => {
            let cfg = common.config()?;
            eprintln!("configuration is valid");
            let text = serde_json::to_string_pretty(&cfg)?;
            match &common.out {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
