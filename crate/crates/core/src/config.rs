//! Run configuration: a sectioned TOML file covering the system, traffic,
//! latency, reward, environment and learner parameters.
//!
//! Loading starts from the built-in defaults, overlays the file, then applies
//! a master seed and `section.key=value` overrides in that order. Unknown
//! sections or keys are rejected. The resolved configuration written back
//! out is a complete config file (the run manifest).

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::agent::TrainConfig;
use crate::env::{EnvConfig, EnvSetup, RewardConfig};
use crate::error::{Error, Result};
use crate::fronthaul::{CompressionSets, SystemConfig};
use crate::latency::LatencyModelConfig;
use crate::traffic::TrafficConfig;

pub const MANIFEST_SCHEMA: &str = "fhc-manifest/v1";

/// Orchestration settings that are not part of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Decision steps between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
    pub eval_episodes: usize,
    /// Decision steps per evaluation episode, independent of the training
    /// episode length.
    pub eval_episode_len: usize,
    /// Trailing decision steps of each evaluation episode treated as steady state.
    pub steady_window: usize,
    /// Mean PRB loads visited by `sweep`.
    pub sweep_loads: Vec<f64>,
    /// Added to every seed of the evaluation environment so it never
    /// replays the training traffic.
    pub eval_seed_offset: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            checkpoint_every: 0,
            eval_episodes: 5,
            eval_episode_len: 200,
            steady_window: 50,
            sweep_loads: vec![50.0, 100.0, 175.0, 225.0, 273.0],
            eval_seed_offset: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub compression: CompressionSets,
    pub traffic: TrafficConfig,
    pub latency: LatencyModelConfig,
    pub reward: RewardConfig,
    pub env: EnvConfig,
    pub agent: TrainConfig,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = Self {
            system: SystemConfig::default(),
            compression: CompressionSets::default(),
            traffic: TrafficConfig::default(),
            latency: LatencyModelConfig::default(),
            reward: RewardConfig::default(),
            env: EnvConfig::default(),
            agent: TrainConfig::default(),
            run: RunSection::default(),
        };
        cfg.sync();
        cfg
    }
}

impl RunConfig {
    /// Copies shared values into the sections that consume them.
    fn sync(&mut self) {
        self.traffic.n_prb_max = self.system.n_prb_max;
        self.agent.gamma = self.reward.gamma;
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.traffic.validate()?;
        self.latency.validate()?;
        self.reward.validate()?;
        self.agent.validate()?;
        if self.env.n_dec == 0 {
            return Err(Error::InvalidConfig("env: n_dec must be positive".into()));
        }
        if self.run.steady_window == 0 || self.run.steady_window > self.run.eval_episode_len {
            return Err(Error::InvalidConfig(
                "run: need 0 < steady_window <= eval_episode_len".into(),
            ));
        }
        Ok(())
    }

    /// Derives every seed from one master seed.
    pub fn apply_master_seed(&mut self, seed: u64) {
        self.traffic.seed = seed;
        self.latency.seed = seed.wrapping_add(1);
        self.agent.seed = seed.wrapping_add(2);
        self.agent.init_seed = seed.wrapping_add(3);
    }

    pub fn env_setup(&self) -> EnvSetup {
        EnvSetup {
            sys: self.system.clone(),
            sets: self.compression.clone(),
            traffic: self.traffic.clone(),
            latency: self.latency.clone(),
            reward: self.reward.clone(),
            env: self.env.clone(),
        }
    }

    /// Environment setup for evaluation runs, on separate RNG streams.
    pub fn eval_env_setup(&self) -> EnvSetup {
        let mut setup = self.env_setup();
        setup.traffic.seed = setup.traffic.seed.wrapping_add(self.run.eval_seed_offset);
        setup.latency.seed = setup.latency.seed.wrapping_add(self.run.eval_seed_offset);
        setup
    }

    pub fn seeds(&self) -> std::collections::BTreeMap<String, u64> {
        [
            ("traffic", self.traffic.seed),
            ("latency", self.latency.seed),
            ("agent", self.agent.seed),
            ("init", self.agent.init_seed),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Builds a configuration from defaults, the given TOML text, an
    /// optional master seed and `key=value` overrides.
    pub fn resolve(text: Option<&str>, seed: Option<u64>, overrides: &[String]) -> Result<Self> {
        let mut table = to_table(&RunConfig::default())?;
        if let Some(text) = text {
            let file: Table = toml::from_str(text)
                .map_err(|e| Error::InvalidConfig(format!("config parse error: {e}")))?;
            merge(&mut table, file, "")?;
        }
        if let Some(seed) = seed {
            let mut cfg = from_table(table.clone())?;
            cfg.apply_master_seed(seed);
            table = to_table(&cfg)?;
        }
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg = from_table(table)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, seed: Option<u64>, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::resolve(Some(&text), seed, overrides)
    }

    /// The resolved configuration as a loadable TOML document.
    pub fn to_manifest(&self) -> Result<String> {
        let body = toml::to_string(self)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize config: {e}")))?;
        Ok(format!("# schema: {MANIFEST_SCHEMA}\n{body}"))
    }
}

fn to_table(cfg: &RunConfig) -> Result<Table> {
    Table::try_from(cfg).map_err(|e| Error::InvalidConfig(format!("cannot serialize config: {e}")))
}

fn from_table(table: Table) -> Result<RunConfig> {
    let mut cfg: RunConfig = Value::Table(table)
        .try_into()
        .map_err(|e| Error::InvalidConfig(format!("{e}")))?;
    cfg.sync();
    Ok(cfg)
}

/// Integers given where the defaults hold floats are widened.
fn coerce(base: &Value, value: Value) -> Value {
    match (base, value) {
        (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
        (Value::Array(b), Value::Array(items)) if b.first().is_some_and(Value::is_float) => {
            Value::Array(items.into_iter().map(|v| coerce(&b[0], v)).collect())
        }
        (_, v) => v,
    }
}

fn merge(base: &mut Table, overlay: Table, prefix: &str) -> Result<()> {
    for (key, value) in overlay {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let Some(slot) = base.get_mut(&key) else {
            return Err(Error::InvalidConfig(format!("unknown key `{path}`")));
        };
        match (slot, value) {
            (Value::Table(b), Value::Table(o)) => merge(b, o, &path)?,
            (slot, value) => *slot = coerce(slot, value),
        }
    }
    Ok(())
}

fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value: Value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| {
        Error::InvalidConfig(format!("override `{spec}` has an empty key"))
    })?;
    let mut current = table;
    for part in parts {
        current = match current.get_mut(part) {
            Some(Value::Table(t)) => t,
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        };
    }
    let Some(slot) = current.get_mut(leaf) else {
        return Err(Error::InvalidConfig(format!("unknown key `{key}`")));
    };
    *slot = coerce(slot, value);
    Ok(())
}
