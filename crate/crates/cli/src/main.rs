//! `clef`: run large-flow detection experiments, bounds and oracle checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clef_core::harness::{cmd_bounds, cmd_oracle, cmd_replay, cmd_simulate, ExperimentConfig};
use clef_core::Error;

#[derive(Parser)]
#[command(name = "clef", version, about = "Large-flow detector simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults reproduce the evaluation link.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<u32>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    horizon_seconds: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the attack grid and write runs.csv and summary.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write each run's generated packet stream to OUT/traces.
        #[arg(long)]
        traces: bool,
    },
    /// Tabulate detection and damage bounds into bounds.csv.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo estimates against the single-level bound into oracle.csv.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Run a detector over a trace file and write replay.csv.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Trace with `flow_id,timestamp_ns,size_bytes` lines.
        #[arg(long)]
        trace: PathBuf,
        /// Sweep run whose detector and seeds to use.
        #[arg(long, default_value_t = 0)]
        run_id: u64,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.run.seed = s;
    }
    if let Some(r) = c.repeats {
        cfg.run.repeats = r;
    }
    if let Some(w) = c.workers {
        cfg.run.workers = w;
    }
    if let Some(h) = c.horizon_seconds {
        cfg.run.horizon_seconds = h;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Simulate { common, traces } => {
            let cfg = load(&common)?;
            let (rows, summary) = cmd_simulate(&cfg, &common.out, traces)?;
            eprintln!("{} runs, {} cells -> {}", rows.len(), summary.len(), common.out.display());
        }
        Cmd::Bounds { common } => {
            let rows = cmd_bounds(&load(&common)?, &common.out)?;
            eprintln!("{} bound rows -> {}", rows.len(), common.out.display());
        }
        Cmd::Oracle { common } => {
            let rows = cmd_oracle(&load(&common)?, &common.out)?;
            let ok = rows.iter().filter(|r| r.bound_satisfied).count();
            eprintln!("{ok}/{} rows satisfy the bound -> {}", rows.len(), common.out.display());
        }
        Cmd::Replay { common, trace, run_id } => {
            let o = cmd_replay(&load(&common)?, &trace, &common.out, run_id)?;
            println!("packets_per_second={:.0}", o.packets_per_second);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
