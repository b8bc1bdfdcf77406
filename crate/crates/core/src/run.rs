//! Orchestration behind the `fhc` binary: training with logs and checkpoints,
//! policy evaluation, the load sweep and the static oracle table.
//!
//! Every CSV written here starts with a `# schema: <name>` line followed by a
//! header row. Floats are printed with Rust's shortest round-trip formatting,
//! so identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::agent::{greedy_action, train, Learner};
use crate::config::RunConfig;
use crate::env::{reference_policy, Delta, FronthaulEnv, StepInfo};
use crate::error::{Error, Result};
use crate::fronthaul::CompressionConfig;
use crate::oracle::{evaluate_static_configs, FeasibilityMode, StaticEvaluation};
use crate::qnet::{Checkpoint, Mlp};

pub const TRAIN_LOG_SCHEMA: &str = "fhc-train-log/v1";
pub const EVAL_KPI_SCHEMA: &str = "fhc-eval-kpi/v1";
pub const HISTOGRAM_SCHEMA: &str = "fhc-config-histogram/v1";
pub const SWEEP_SCHEMA: &str = "fhc-sweep/v1";
pub const ORACLE_SCHEMA: &str = "fhc-oracle/v1";

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const KPI_FILE: &str = "eval_kpi.csv";
pub const SUMMARY_FILE: &str = "eval_summary.json";
pub const HISTOGRAM_FILE: &str = "config_histogram.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ORACLE_FILE: &str = "oracle.csv";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn config_columns(k: usize) -> String {
    (0..k).map(|c| format!(",q{c},b{c},r{c}")).collect()
}

fn config_values(configs: &[CompressionConfig]) -> String {
    configs.iter().map(|c| format!(",{},{},{}", c.q, c.b_w, c.r_w)).collect()
}

fn delta_name(d: Delta) -> &'static str {
    match d {
        Delta::Noop => "noop",
        Delta::QDown => "q-",
        Delta::QUp => "q+",
        Delta::BDown => "b-",
        Delta::BUp => "b+",
        Delta::RDown => "r-",
        Delta::RUp => "r+",
    }
}

/// Trains a learner on the fronthaul environment described by `cfg`.
///
/// With an output directory this writes the manifest, the per-step training
/// log, periodic checkpoints (`checkpoints/step_<n>.json`) and the final
/// checkpoint.
pub fn train_policy(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<Learner> {
    cfg.validate()?;
    let mut env = FronthaulEnv::new(cfg.env_setup())?;
    let k = env.k_cells();
    let mut log = String::new();
    if let Some(dir) = out_dir {
        write_file(&dir.join(MANIFEST_FILE), &cfg.to_manifest()?)?;
        writeln!(log, "# schema: {TRAIN_LOG_SCHEMA}").ok();
        writeln!(
            log,
            "step,reward,loss,temperature,beta_per,cell_sum_util,max_latency_us,violation{},cell,action",
            config_columns(k)
        )
        .ok();
    }
    let seeds = cfg.seeds();
    let every = cfg.run.checkpoint_every;
    let trained = train(&mut env, &cfg.agent, |rec, info: &StepInfo, learner| {
        let Some(dir) = out_dir else { return Ok(()) };
        let loss = rec.loss.map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            log,
            "{},{},{},{},{},{},{},{}{},{},{}",
            rec.step,
            rec.reward,
            loss,
            rec.temperature,
            rec.beta_per,
            info.cell_sum_util,
            info.max_latency_s * 1e6,
            u8::from(!info.indicator),
            config_values(&info.configs),
            info.cell,
            delta_name(info.delta)
        )
        .ok();
        if every > 0 && (rec.step + 1) % every == 0 {
            let path = dir.join("checkpoints").join(format!("step_{:08}.json", rec.step + 1));
            let ckpt = Checkpoint::new(&learner.net, &learner.target, seeds.clone(), rec.step + 1);
            write_file(&path, &ckpt.to_json()?)?;
        }
        Ok(())
    })?;
    if let Some(dir) = out_dir {
        write_file(&dir.join(TRAIN_LOG_FILE), &log)?;
        let l = &trained.learner;
        let ckpt = Checkpoint::new(&l.net, &l.target, seeds, cfg.agent.total_steps);
        write_file(&dir.join(CHECKPOINT_FILE), &ckpt.to_json()?)?;
    }
    Ok(trained.learner)
}

/// How evaluation chooses actions.
#[derive(Debug, Clone)]
pub enum Policy {
    /// Greedy in the online network's Q-values.
    Greedy(Mlp),
    /// One configuration on every cell, never changed.
    Static(CompressionConfig),
}

impl Policy {
    /// The built-in reference scheme for `cfg`.
    pub fn reference(cfg: &RunConfig) -> Result<Self> {
        reference_policy(&cfg.system, &cfg.compression).map(Policy::Static)
    }

    /// Greedy policy from a checkpoint, checked against the environment's
    /// state and action dimensions.
    pub fn from_checkpoint(ckpt: &Checkpoint, cfg: &RunConfig) -> Result<Self> {
        let (net, _) = ckpt.networks()?;
        let env = FronthaulEnv::new(cfg.env_setup())?;
        let spec = net.spec();
        if spec.input_dim != env.observe().len() || spec.output_dim != crate::env::N_ACTIONS {
            return Err(Error::ArchitectureMismatch);
        }
        Ok(Policy::Greedy(net))
    }

    fn name(&self) -> String {
        match self {
            Policy::Greedy(_) => "greedy".into(),
            Policy::Static(c) => format!("static {c}"),
        }
    }
}

/// One decision step of an evaluation rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalStep {
    pub episode: usize,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub policy: String,
    pub episodes: usize,
    pub decision_steps: usize,
    pub slots: usize,
    /// Mean over all slots of the cell-sum utilization.
    pub mean_cell_sum_util: f64,
    /// Same mean restricted to the trailing `steady_window` steps of each episode.
    pub steady_state_util: f64,
    /// Fraction of slots whose max latency reached `tau_max`.
    pub violation_freq: f64,
    /// Payload delivered in non-violating slots per second of simulated time.
    pub throughput_bps: f64,
    /// Configuration changes inside the steady-state windows, summed over episodes.
    pub steady_config_changes: usize,
    /// Configurations at the end of the last episode.
    pub final_configs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub steps: Vec<EvalStep>,
    pub summary: EvalSummary,
}

/// Rolls out `policy` for `episodes` episodes of `cfg.run.eval_episode_len`
/// decision steps on the evaluation RNG streams.
pub fn evaluate(cfg: &RunConfig, policy: &Policy, episodes: usize) -> Result<EvalReport> {
    cfg.validate()?;
    let mut env = FronthaulEnv::new(cfg.eval_env_setup())?;
    if let Policy::Static(c) = policy {
        env.set_initial_config(c)?;
    }
    let len = cfg.run.eval_episode_len;
    let window = cfg.run.steady_window;
    let mut steps = Vec::with_capacity(episodes * len);
    for episode in 0..episodes {
        env.reset()?;
        for _ in 0..len {
            let delta = match policy {
                Policy::Greedy(net) => {
                    let q = net.forward(&env.observe())?;
                    Delta::from_index(greedy_action(&q)).unwrap_or(Delta::Noop)
                }
                Policy::Static(_) => Delta::Noop,
            };
            let (_, _, info) = env.step_delta(delta)?;
            steps.push(EvalStep { episode, info });
        }
    }
    let summary = summarize(cfg, policy, &steps, episodes, len, window);
    Ok(EvalReport { steps, summary })
}

fn summarize(
    cfg: &RunConfig,
    policy: &Policy,
    steps: &[EvalStep],
    episodes: usize,
    len: usize,
    window: usize,
) -> EvalSummary {
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        if n == 0 { 0.0 } else { sum / n as f64 }
    };
    let slots: usize = steps.iter().map(|s| s.info.n_slots).sum();
    let violated: usize = steps.iter().map(|s| s.info.violated_slots).sum();
    let delivered: u64 = steps.iter().map(|s| s.info.delivered_payload_bits).sum();
    let steady = |i: usize| i % len >= len - window;
    let steady_changes = steps
        .windows(2)
        .enumerate()
        .filter(|(i, w)| steady(i + 1) && steady(*i) && w[0].info.configs != w[1].info.configs)
        .count();
    EvalSummary {
        policy: policy.name(),
        episodes,
        decision_steps: steps.len(),
        slots,
        mean_cell_sum_util: mean(&mut steps.iter().map(|s| s.info.cell_sum_util)),
        steady_state_util: mean(
            &mut steps.iter().enumerate().filter(|(i, _)| steady(*i)).map(|(_, s)| s.info.cell_sum_util),
        ),
        violation_freq: if slots == 0 { 0.0 } else { violated as f64 / slots as f64 },
        throughput_bps: if slots == 0 {
            0.0
        } else {
            delivered as f64 / (slots as f64 * cfg.system.t_slot_s)
        },
        steady_config_changes: steady_changes,
        final_configs: steps
            .last()
            .map(|s| s.info.configs.iter().map(ToString::to_string).collect())
            .unwrap_or_default(),
    }
}

impl EvalReport {
    pub fn kpi_csv(&self, k: usize) -> String {
        let mut out = format!("# schema: {EVAL_KPI_SCHEMA}\n");
        writeln!(
            out,
            "episode,step,cell,action,cell_sum_util,max_latency_us,violated_slots,n_slots,delivered_payload_bits{}",
            config_columns(k)
        )
        .ok();
        for s in &self.steps {
            let i = &s.info;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}{}",
                s.episode,
                i.step,
                i.cell,
                delta_name(i.delta),
                i.cell_sum_util,
                i.max_latency_s * 1e6,
                i.violated_slots,
                i.n_slots,
                i.delivered_payload_bits,
                config_values(&i.configs)
            )
            .ok();
        }
        out
    }

    /// Per decision step, how many cells (summed over episodes) hold each
    /// value of each compression parameter.
    pub fn histogram_csv(&self) -> String {
        let mut counts: BTreeMap<(u64, &'static str, u32), usize> = BTreeMap::new();
        for s in &self.steps {
            for c in &s.info.configs {
                for (param, value) in [("q", c.q), ("b_w", c.b_w), ("r_w", c.r_w)] {
                    *counts.entry((s.info.step, param, value)).or_default() += 1;
                }
            }
        }
        let mut out = format!("# schema: {HISTOGRAM_SCHEMA}\nstep,param,value,count\n");
        for ((step, param, value), n) in counts {
            writeln!(out, "{step},{param},{value},{n}").ok();
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    /// Writes the KPI CSV, the summary JSON and the configuration histogram.
    pub fn write(&self, out_dir: &Path, k: usize) -> Result<Vec<PathBuf>> {
        let files = [
            (KPI_FILE, self.kpi_csv(k)),
            (SUMMARY_FILE, self.summary_json()?),
            (HISTOGRAM_FILE, self.histogram_csv()),
        ];
        files
            .into_iter()
            .map(|(name, body)| {
                let path = out_dir.join(name);
                write_file(&path, &body).map(|_| path)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mean_prb: f64,
    /// Steady-state utilization of the trained greedy policy.
    pub util_drlfc: f64,
    pub util_ref: f64,
    pub gain_percent: f64,
    pub violation_freq_drlfc: f64,
}

/// Trains and evaluates one policy per mean load, comparing each with the
/// reference scheme. Loads run on separate threads when `parallel` is set;
/// results do not depend on it.
pub fn sweep(cfg: &RunConfig, loads: &[f64], parallel: bool) -> Result<Vec<SweepRow>> {
    let one = |load: f64| -> Result<SweepRow> {
        let mut c = cfg.clone();
        c.traffic.mean_prb = load;
        c.validate()?;
        let learner = train_policy(&c, None)?;
        let drl = evaluate(&c, &Policy::Greedy(learner.net), c.run.eval_episodes)?.summary;
        let reference = evaluate(&c, &Policy::reference(&c)?, c.run.eval_episodes)?.summary;
        let gain = (drl.steady_state_util - reference.steady_state_util) / reference.steady_state_util;
        Ok(SweepRow {
            mean_prb: load,
            util_drlfc: drl.steady_state_util,
            util_ref: reference.steady_state_util,
            gain_percent: gain * 100.0,
            violation_freq_drlfc: drl.violation_freq,
        })
    };
    if !parallel {
        return loads.iter().map(|&l| one(l)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = loads.iter().map(|&l| s.spawn(move || one(l))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::InvalidConfig("sweep worker panicked".into()))))
            .collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!(
        "# schema: {SWEEP_SCHEMA}\nmean_prb,util_drlfc,util_ref,gain_percent,violation_freq_drlfc\n"
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.mean_prb, r.util_drlfc, r.util_ref, r.gain_percent, r.violation_freq_drlfc
        )
        .ok();
    }
    out
}

pub fn write_sweep(rows: &[SweepRow], out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join(SWEEP_FILE);
    write_file(&path, &sweep_csv(rows))?;
    Ok(path)
}

/// Every symmetric configuration evaluated at each PRB count.
pub fn oracle_table(
    cfg: &RunConfig,
    n_prbs: &[u32],
    mode: FeasibilityMode,
) -> Result<Vec<(u32, StaticEvaluation)>> {
    let mut rows = Vec::new();
    for &n in n_prbs {
        let evals = evaluate_static_configs(
            &cfg.system,
            &cfg.compression,
            n,
            &cfg.latency,
            cfg.reward.tau_max_s,
            mode,
        )?;
        rows.extend(evals.into_iter().map(|e| (n, e)));
    }
    Ok(rows)
}

pub fn oracle_csv(rows: &[(u32, StaticEvaluation)]) -> String {
    let mut out = format!(
        "# schema: {ORACLE_SCHEMA}\nn_prb,q,b_w,r_w,aggregate_bits,aggregate_rate_bps,cell_sum_util,worst_case_latency_us,feasible\n"
    );
    for (n, e) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            n,
            e.config.q,
            e.config.b_w,
            e.config.r_w,
            e.aggregate_bits,
            e.aggregate_rate_bps,
            e.cell_sum_util,
            e.worst_case_latency_s * 1e6,
            e.feasible
        )
        .ok();
    }
    out
}

pub fn write_oracle(rows: &[(u32, StaticEvaluation)], out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join(ORACLE_FILE);
    write_file(&path, &oracle_csv(rows))?;
    Ok(path)
}
