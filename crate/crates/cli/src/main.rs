//! `fhc`: train, evaluate and sweep fronthaul compression controllers.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for runtime errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fhc_core::config::RunConfig;
use fhc_core::oracle::{best_static_config, FeasibilityMode};
use fhc_core::qnet::Checkpoint;
use fhc_core::run::{self, Policy};
use fhc_core::Error;

#[derive(Parser)]
#[command(name = "fhc", version, about = "Fronthaul compression simulator and DDQN controller")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used for anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for all outputs.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Master seed; derives the traffic, latency, agent and init seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Override one value, e.g. `--set traffic.mean_prb=175`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn resolve(&self) -> fhc_core::Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::load(path, self.seed, &self.overrides),
            None => RunConfig::resolve(None, self.seed, &self.overrides),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a controller; writes the manifest, training log and checkpoints.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a trained checkpoint or the reference scheme.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to evaluate greedily.
        #[arg(long, conflicts_with = "reference", required_unless_present = "reference")]
        checkpoint: Option<PathBuf>,
        /// Evaluate the static reference configuration instead.
        #[arg(long)]
        reference: bool,
        /// Number of episodes; defaults to `run.eval_episodes`.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Train and evaluate at each mean PRB load and compare with the reference.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mean loads; defaults to `run.sweep_loads`.
        #[arg(long, value_delimiter = ',')]
        loads: Option<Vec<f64>>,
        /// Run loads one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Enumerate every static configuration at the given PRB counts.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "273")]
        n_prb: Vec<u32>,
        /// `capacity` or `latency`.
        #[arg(long, default_value = "latency")]
        mode: FeasibilityMode,
    },
}

/// Failure tagged with the exit code it maps to.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::NotInSet { .. } => Failure::Config(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn config(common: &Common) -> Result<RunConfig, Failure> {
    common.resolve().context("invalid configuration").map_err(Failure::Config)
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Train { common } => {
            let cfg = config(&common)?;
            run::train_policy(&cfg, Some(&common.out_dir))?;
            println!("wrote {}", common.out_dir.display());
        }
        Command::Eval { common, checkpoint, reference, episodes } => {
            let cfg = config(&common)?;
            let policy = match checkpoint {
                Some(path) => {
                    let ckpt = Checkpoint::load(&path)
                        .with_context(|| format!("loading checkpoint {}", path.display()))
                        .map_err(Failure::Runtime)?;
                    Policy::from_checkpoint(&ckpt, &cfg)?
                }
                None if reference => Policy::reference(&cfg)?,
                None => unreachable!("clap requires --checkpoint or --reference"),
            };
            let report = run::evaluate(&cfg, &policy, episodes.unwrap_or(cfg.run.eval_episodes))?;
            report.write(&common.out_dir, cfg.system.k_cells)?;
            println!("{}", report.summary_json()?);
        }
        Command::Sweep { common, loads, sequential } => {
            let cfg = config(&common)?;
            let loads = loads.unwrap_or_else(|| cfg.run.sweep_loads.clone());
            let rows = run::sweep(&cfg, &loads, !sequential)?;
            let path = run::write_sweep(&rows, &common.out_dir)?;
            print!("{}", run::sweep_csv(&rows));
            eprintln!("wrote {}", path.display());
        }
        Command::Oracle { common, n_prb, mode } => {
            let cfg = config(&common)?;
            let rows = run::oracle_table(&cfg, &n_prb, mode)?;
            let path = run::write_oracle(&rows, &common.out_dir)?;
            for &n in &n_prb {
                match best_static_config(
                    &cfg.system,
                    &cfg.compression,
                    n,
                    &cfg.latency,
                    cfg.reward.tau_max_s,
                    mode,
                ) {
                    Ok(best) => println!(
                        "n_prb={n}: best {} cell-sum util {} worst-case latency {} us",
                        best.config,
                        best.cell_sum_util,
                        best.worst_case_latency_s * 1e6
                    ),
                    Err(Error::Infeasible) => println!("n_prb={n}: no feasible configuration"),
                    Err(e) => return Err(e.into()),
                }
            }
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
