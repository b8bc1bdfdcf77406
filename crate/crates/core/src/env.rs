//! The constrained fronthaul-compression MDP.
//!
//! Every decision step changes one knob of one cell (cells are visited
//! round-robin), then simulates `n_dec` slots of traffic. The observed state
//! holds, per cell, the interval-mean utilization, the interval-max latency
//! and the configuration indices. The reward is the cell-sum utilization plus
//! `lambda * (1(max latency < tau_max) - d)`.

use serde::{Deserialize, Serialize};

use crate::agent::Environment;
use crate::error::{Error, Result};
use crate::fronthaul::{
    cell_bits, slot_utilization, CompressionConfig, CompressionSets, ConfigIndex, SlotRecord,
    SystemConfig,
};
use crate::latency::{LatencyModel, LatencyModelConfig};
use crate::oracle::{self, FeasibilityMode};
use crate::traffic::{PrbProcess, TrafficConfig};

/// Number of per-step actions: no-op plus a ±1 step on each of three knobs.
pub const N_ACTIONS: usize = 7;

/// Features per cell in [`encode_state`].
pub const FEATURES_PER_CELL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Delta {
    Noop,
    QDown,
    QUp,
    BDown,
    BUp,
    RDown,
    RUp,
}

impl Delta {
    pub const ALL: [Delta; N_ACTIONS] = [
        Delta::Noop,
        Delta::QDown,
        Delta::QUp,
        Delta::BDown,
        Delta::BUp,
        Delta::RDown,
        Delta::RUp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    pub fn inverse(self) -> Self {
        match self {
            Delta::Noop => Delta::Noop,
            Delta::QDown => Delta::QUp,
            Delta::QUp => Delta::QDown,
            Delta::BDown => Delta::BUp,
            Delta::BUp => Delta::BDown,
            Delta::RDown => Delta::RUp,
            Delta::RUp => Delta::RDown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvAction {
    pub cell: usize,
    pub delta: Delta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub util: f64,
    pub latency_s: f64,
    pub idx: ConfigIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub cells: Vec<CellState>,
}

impl EnvState {
    pub fn uniform(k_cells: usize, idx: ConfigIndex) -> Self {
        Self { cells: vec![CellState { util: 0.0, latency_s: 0.0, idx }; k_cells] }
    }

    pub fn k_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_sum_util(&self) -> f64 {
        self.cells.iter().map(|c| c.util).sum()
    }

    pub fn max_latency(&self) -> f64 {
        self.cells.iter().map(|c| c.latency_s).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub lambda: f64,
    /// Constraint target level, `1 - delta` by default.
    pub d: f64,
    pub tau_max_s: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { lambda: 1.0, d: 0.999, tau_max_s: 260e-6, delta: 1e-3, gamma: 0.95 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig("reward: gamma must be in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.d) {
            return Err(Error::InvalidConfig("reward: d must be in [0, 1]".into()));
        }
        if !(self.tau_max_s > 0.0) {
            return Err(Error::InvalidConfig("reward: tau_max_s must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig("reward: delta must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Slots simulated per decision step.
    pub n_dec: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { n_dec: 10 }
    }
}

/// Per-step KPIs.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub step: u64,
    pub cell: usize,
    pub delta: Delta,
    /// Mean over the interval of the per-slot cell-sum utilization.
    pub cell_sum_util: f64,
    pub max_latency_s: f64,
    /// `1(max latency < tau_max)`.
    pub indicator: bool,
    /// Payload bits of slots whose latency met the constraint.
    pub delivered_payload_bits: u64,
    pub violated_slots: usize,
    pub n_slots: usize,
    pub configs: Vec<CompressionConfig>,
}

/// Moves one index by ±1; out-of-range moves leave the state unchanged.
pub fn apply_action(state: &EnvState, action: EnvAction, sets: &CompressionSets) -> EnvState {
    let mut next = state.clone();
    let Some(cell) = next.cells.get_mut(action.cell) else {
        return next;
    };
    let step = |idx: &mut usize, up: bool, len: usize| {
        if up {
            if *idx + 1 < len {
                *idx += 1;
            }
        } else if *idx > 0 {
            *idx -= 1;
        }
    };
    let idx = &mut cell.idx;
    match action.delta {
        Delta::Noop => {}
        Delta::QDown => step(&mut idx.q, false, sets.q_set.len()),
        Delta::QUp => step(&mut idx.q, true, sets.q_set.len()),
        Delta::BDown => step(&mut idx.b, false, sets.b_w_set.len()),
        Delta::BUp => step(&mut idx.b, true, sets.b_w_set.len()),
        Delta::RDown => step(&mut idx.r, false, sets.r_w_set.len()),
        Delta::RUp => step(&mut idx.r, true, sets.r_w_set.len()),
    }
    next
}

/// `sum(utils) + lambda * (1(max_latency < tau_max) - d)`.
pub fn compute_reward(cell_utils: &[f64], max_latency_s: f64, cfg: &RewardConfig) -> f64 {
    let met = if max_latency_s < cfg.tau_max_s { 1.0 } else { 0.0 };
    cell_utils.iter().sum::<f64>() + cfg.lambda * (met - cfg.d)
}

/// Network input for `state`, `FEATURES_PER_CELL` values per cell:
///
/// | offset | feature                                  |
/// |--------|------------------------------------------|
/// | 0      | `K * util`, clipped to `[0, 1.5]`        |
/// | 1      | `latency / tau_max`, clipped to `[0, 2]` |
/// | 2      | `q_idx / (|Q| - 1)`                      |
/// | 3      | `b_idx / (|B| - 1)`                      |
/// | 4      | `r_idx / (|R| - 1)`                      |
///
/// Cells are listed starting from `focus` (the cell the next action
/// targets) and wrap around, so the first block always describes the cell
/// being controlled. Index features of single-element sets are 0.
pub fn encode_state(
    state: &EnvState,
    sets: &CompressionSets,
    tau_max_s: f64,
    focus: usize,
) -> Vec<f64> {
    let k = state.k_cells();
    let scale = |i: usize, len: usize| if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(FEATURES_PER_CELL * k);
    for j in 0..k {
        let c = &state.cells[(focus + j) % k];
        out.push((k as f64 * c.util).clamp(0.0, 1.5));
        out.push((c.latency_s / tau_max_s).clamp(0.0, 2.0));
        out.push(scale(c.idx.q, sets.q_set.len()));
        out.push(scale(c.idx.b, sets.b_w_set.len()));
        out.push(scale(c.idx.r, sets.r_w_set.len()));
    }
    out
}

/// The static configuration that keeps the full-load aggregate rate within
/// capacity while maximizing it.
pub fn reference_policy(sys: &SystemConfig, sets: &CompressionSets) -> Result<CompressionConfig> {
    let best = oracle::best_static_config(
        sys,
        sets,
        sys.n_prb_max,
        &LatencyModelConfig::default(),
        f64::INFINITY,
        FeasibilityMode::Capacity,
    )?;
    Ok(best.config)
}

/// Everything needed to build a [`FronthaulEnv`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvSetup {
    pub sys: SystemConfig,
    pub sets: CompressionSets,
    pub traffic: TrafficConfig,
    pub latency: LatencyModelConfig,
    pub reward: RewardConfig,
    pub env: EnvConfig,
}

/// Slot-driven simulator of the shared fronthaul link.
#[derive(Debug, Clone)]
pub struct FronthaulEnv {
    setup: EnvSetup,
    traffic: PrbProcess,
    latency: LatencyModel,
    initial: ConfigIndex,
    state: EnvState,
    decision_step: u64,
    slot: u64,
    last_interval: Vec<SlotRecord>,
}

impl FronthaulEnv {
    pub fn new(mut setup: EnvSetup) -> Result<Self> {
        setup.sys.validate()?;
        setup.reward.validate()?;
        setup.traffic.n_prb_max = setup.sys.n_prb_max;
        if setup.env.n_dec == 0 {
            return Err(Error::InvalidConfig("env: n_dec must be positive".into()));
        }
        let k = setup.sys.k_cells;
        let traffic = PrbProcess::new(setup.traffic.clone(), k)?;
        let latency = LatencyModel::new(setup.latency.clone(), k)?;
        let initial = setup.sets.max_compression();
        let mut env = Self {
            state: EnvState::uniform(k, initial),
            setup,
            traffic,
            latency,
            initial,
            decision_step: 0,
            slot: 0,
            last_interval: Vec::new(),
        };
        env.reset()?;
        Ok(env)
    }

    pub fn setup(&self) -> &EnvSetup {
        &self.setup
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn k_cells(&self) -> usize {
        self.setup.sys.k_cells
    }

    /// Cell targeted by the next action.
    pub fn next_cell(&self) -> usize {
        (self.decision_step % self.k_cells() as u64) as usize
    }

    pub fn decision_step(&self) -> u64 {
        self.decision_step
    }

    /// Slot records of the most recent interval.
    pub fn last_interval(&self) -> &[SlotRecord] {
        &self.last_interval
    }

    pub fn configs(&self) -> Vec<CompressionConfig> {
        self.state.cells.iter().map(|c| self.setup.sets.resolve(c.idx)).collect()
    }

    /// Configuration applied to every cell at reset.
    pub fn set_initial_config(&mut self, cfg: &CompressionConfig) -> Result<()> {
        self.initial = self.setup.sets.index_of(cfg)?;
        Ok(())
    }

    /// Restores the initial configuration and observes one interval under it.
    /// RNG streams continue; the round-robin position restarts at cell 0.
    pub fn reset(&mut self) -> Result<()> {
        self.state = EnvState::uniform(self.k_cells(), self.initial);
        self.decision_step = 0;
        let (state, _) = self.simulate_interval(&self.state.clone())?;
        self.state = state;
        Ok(())
    }

    /// Network input for the current state, focused on [`Self::next_cell`].
    pub fn observe(&self) -> Vec<f64> {
        encode_state(&self.state, &self.setup.sets, self.setup.reward.tau_max_s, self.next_cell())
    }

    /// Applies `delta` to the round-robin cell and advances one interval.
    pub fn step_delta(&mut self, delta: Delta) -> Result<(EnvState, f64, StepInfo)> {
        self.step(EnvAction { cell: self.next_cell(), delta })
    }

    pub fn step(&mut self, action: EnvAction) -> Result<(EnvState, f64, StepInfo)> {
        if action.cell >= self.k_cells() {
            return Err(Error::IndexOutOfRange { index: action.cell, len: self.k_cells() });
        }
        let configured = apply_action(&self.state, action, &self.setup.sets);
        let (state, mut info) = self.simulate_interval(&configured)?;
        let utils: Vec<f64> = state.cells.iter().map(|c| c.util).collect();
        let reward = compute_reward(&utils, info.max_latency_s, &self.setup.reward);
        info.step = self.decision_step;
        info.cell = action.cell;
        info.delta = action.delta;
        self.state = state.clone();
        self.decision_step += 1;
        Ok((state, reward, info))
    }

    fn simulate_interval(&mut self, configured: &EnvState) -> Result<(EnvState, StepInfo)> {
        let EnvSetup { sys, sets, reward, env, .. } = &self.setup;
        let k = sys.k_cells;
        let configs: Vec<CompressionConfig> =
            configured.cells.iter().map(|c| sets.resolve(c.idx)).collect();
        let mut util_sum = vec![0.0; k];
        let mut max_latency = 0.0_f64;
        let mut delivered = 0u64;
        let mut violated = 0usize;
        let mut records = Vec::with_capacity(env.n_dec * k);
        for _ in 0..env.n_dec {
            let prbs = self.traffic.next_slot();
            let mut bits = Vec::with_capacity(k);
            let mut payload_total = 0u64;
            for (cell, (&n_prb, cfg)) in prbs.iter().zip(&configs).enumerate() {
                let (payload, weights) = cell_bits(sys, sets, n_prb, cfg)?;
                let rate = (payload + weights) as f64 / sys.t_slot_s;
                let util = slot_utilization(rate, sys.c_fh_bps)?;
                util_sum[cell] += util;
                payload_total += payload;
                bits.push(payload + weights);
                records.push(SlotRecord {
                    t: self.slot,
                    k: cell,
                    n_prb,
                    config: *cfg,
                    payload_bits: payload,
                    weight_bits: weights,
                    rate_bps: rate,
                    util,
                    latency_s: 0.0,
                });
            }
            let latencies = self.latency.slot_latency(&bits, sys.c_fh_bps)?;
            let base = records.len() - k;
            for (rec, &l) in records[base..].iter_mut().zip(&latencies) {
                rec.latency_s = l;
            }
            let slot_max = latencies.iter().copied().fold(0.0, f64::max);
            max_latency = max_latency.max(slot_max);
            if slot_max < reward.tau_max_s {
                delivered += payload_total;
            } else {
                violated += 1;
            }
            self.slot += 1;
        }
        let n = env.n_dec as f64;
        let mut state = configured.clone();
        for (cell, sum) in state.cells.iter_mut().zip(&util_sum) {
            cell.util = sum / n;
            cell.latency_s = max_latency;
        }
        let info = StepInfo {
            step: self.decision_step,
            cell: 0,
            delta: Delta::Noop,
            cell_sum_util: util_sum.iter().sum::<f64>() / n,
            max_latency_s: max_latency,
            indicator: max_latency < reward.tau_max_s,
            delivered_payload_bits: delivered,
            violated_slots: violated,
            n_slots: env.n_dec,
            configs,
        };
        self.last_interval = records;
        Ok((state, info))
    }
}

impl Environment for FronthaulEnv {
    type Info = StepInfo;

    fn n_actions(&self) -> usize {
        N_ACTIONS
    }

    fn observe(&self) -> Vec<f64> {
        FronthaulEnv::observe(self)
    }

    fn reset(&mut self) -> Result<()> {
        FronthaulEnv::reset(self)
    }

    fn step(&mut self, action: usize) -> Result<(f64, StepInfo)> {
        let delta = Delta::from_index(action)
            .ok_or(Error::IndexOutOfRange { index: action, len: N_ACTIONS })?;
        let (_, reward, info) = self.step_delta(delta)?;
        Ok((reward, info))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronthaul::average_utilization;
    use proptest::prelude::*;

    fn full_load_setup() -> EnvSetup {
        let mut setup = EnvSetup::default();
        setup.traffic.mean_prb = 273.0;
        setup.traffic.sigma_prb = 0.0;
        setup
    }

    fn idx(q: usize, b: usize, r: usize) -> ConfigIndex {
        ConfigIndex { q, b, r }
    }

    #[test]
    fn apply_action_examples() {
        let sets = CompressionSets::default();
        let s = EnvState::uniform(3, idx(0, 0, 2));
        let up = apply_action(&s, EnvAction { cell: 1, delta: Delta::QUp }, &sets);
        assert_eq!(up.cells[1].idx.q, 1);
        assert_eq!(sets.resolve(up.cells[1].idx).q, 8);
        assert_eq!(up.cells[0].idx.q, 0);

        let down = apply_action(&s, EnvAction { cell: 0, delta: Delta::BDown }, &sets);
        assert_eq!(down, s);

        let noop = apply_action(&s, EnvAction { cell: 2, delta: Delta::Noop }, &sets);
        assert_eq!(noop, s);

        let r_up = apply_action(&s, EnvAction { cell: 2, delta: Delta::RUp }, &sets);
        assert_eq!(r_up, s);
    }

    proptest! {
        #[test]
        fn inverse_delta_restores_state(q in 0usize..2, b in 0usize..7, r in 0usize..3, a in 0usize..7, cell in 0usize..3) {
            let sets = CompressionSets::default();
            let s = EnvState::uniform(3, idx(q, b, r));
            let delta = Delta::from_index(a).unwrap();
            let moved = apply_action(&s, EnvAction { cell, delta }, &sets);
            let changed = moved != s;
            let back = apply_action(&moved, EnvAction { cell, delta: delta.inverse() }, &sets);
            if changed || delta == Delta::Noop {
                prop_assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn reward_examples() {
        let cfg = RewardConfig::default();
        let r = compute_reward(&[0.6378], 100e-6, &cfg);
        assert!((r - 0.6388).abs() < 1e-12);
        let r = compute_reward(&[0.332, 0.332, 0.332], 300e-6, &cfg);
        assert!((r - (-0.003)).abs() < 1e-12);
        let unconstrained = RewardConfig { lambda: 0.0, ..cfg };
        assert_eq!(compute_reward(&[0.0, 0.0, 0.0], 0.0, &unconstrained), 0.0);
    }

    #[test]
    fn encode_examples() {
        let sets = CompressionSets::default();
        let tau = 260e-6;
        let zero = EnvState::uniform(3, idx(0, 0, 0));
        assert_eq!(encode_state(&zero, &sets, tau, 0), vec![0.0; 15]);

        let mut s = EnvState::uniform(3, idx(1, 6, 2));
        for c in &mut s.cells {
            c.util = 1.0 / 3.0;
            c.latency_s = tau / 2.0;
        }
        let f = encode_state(&s, &sets, tau, 1);
        for chunk in f.chunks(5) {
            assert!((chunk[0] - 1.0).abs() < 1e-12);
            assert_eq!(&chunk[1..], &[0.5, 1.0, 1.0, 1.0]);
        }

        s.cells[0].latency_s = 3.0 * tau;
        assert_eq!(encode_state(&s, &sets, tau, 0)[1], 2.0);
    }

    #[test]
    fn encode_rotates_to_focus_cell() {
        let sets = CompressionSets::default();
        let mut s = EnvState::uniform(3, idx(0, 0, 0));
        s.cells[2].idx.b = 6;
        let f = encode_state(&s, &sets, 260e-6, 2);
        assert_eq!(f[3], 1.0);
        assert_eq!(f[8], 0.0);
    }

    #[test]
    fn reference_policy_examples() {
        let sys = SystemConfig::default();
        let sets = CompressionSets::default();
        assert_eq!(
            reference_policy(&sys, &sets).unwrap(),
            CompressionConfig { q: 6, b_w: 16, r_w: 4 }
        );

        let roomy = SystemConfig { c_fh_bps: 35e9, ..sys.clone() };
        assert_eq!(
            reference_policy(&roomy, &sets).unwrap(),
            CompressionConfig { q: 6, b_w: 22, r_w: 2 }
        );

        let tight = SystemConfig { c_fh_bps: 1e9, ..sys };
        assert!(matches!(reference_policy(&tight, &sets), Err(Error::Infeasible)));
    }

    #[test]
    fn full_load_reference_step() {
        let mut env = FronthaulEnv::new(full_load_setup()).unwrap();
        let (state, _, info) = env.step_delta(Delta::Noop).unwrap();
        for c in &state.cells {
            assert!((c.util - 0.3320064).abs() < 1e-12);
        }
        assert!((state.cell_sum_util() - 0.9960192).abs() < 1e-12);
        assert!((average_utilization(env.last_interval()).unwrap() - 0.9960192).abs() < 1e-12);
        assert!(info.indicator);
    }

    #[test]
    fn minimum_load_reward() {
        let mut setup = EnvSetup::default();
        setup.traffic.mean_prb = 1.0;
        setup.traffic.sigma_prb = 0.0;
        let mut env = FronthaulEnv::new(setup).unwrap();
        let (state, reward, info) = env.step_delta(Delta::Noop).unwrap();
        let expected = state.cell_sum_util() + 0.001;
        assert!((reward - expected).abs() < 1e-12);
        assert!(state.cell_sum_util() < 0.01);
        assert!(info.indicator);
        assert_eq!(info.violated_slots, 0);
    }

    #[test]
    fn full_modulation_at_full_load_violates() {
        let mut env = FronthaulEnv::new(full_load_setup()).unwrap();
        for _ in 0..3 {
            env.step_delta(Delta::QUp).unwrap();
        }
        assert!(env.configs().iter().all(|c| c.q == 8));
        let (_, reward, info) = env.step_delta(Delta::Noop).unwrap();
        assert!(info.max_latency_s > 260e-6);
        assert!(!info.indicator);
        assert_eq!(info.violated_slots, info.n_slots);
        assert_eq!(info.delivered_payload_bits, 0);
        assert!((reward - (info.cell_sum_util - 0.999)).abs() < 1e-12);
    }

    #[test]
    fn noop_is_fixed_point_under_deterministic_load() {
        let mut env = FronthaulEnv::new(full_load_setup()).unwrap();
        let (first, ..) = env.step_delta(Delta::Noop).unwrap();
        for _ in 0..20 {
            let (s, ..) = env.step_delta(Delta::Noop).unwrap();
            for (a, b) in s.cells.iter().zip(&first.cells) {
                assert_eq!(a.idx, b.idx);
                assert_eq!(a.util, b.util);
            }
        }
    }

    #[test]
    fn round_robin_targets_cells_in_turn() {
        let mut env = FronthaulEnv::new(EnvSetup::default()).unwrap();
        for expected in [0, 1, 2, 0, 1] {
            assert_eq!(env.next_cell(), expected);
            let before = env.configs();
            let (_, _, info) = env.step_delta(Delta::BUp).unwrap();
            assert_eq!(info.cell, expected);
            let changed: Vec<_> =
                before.iter().zip(env.configs()).filter(|(a, b)| *a != b).collect();
            assert_eq!(changed.len(), 1);
        }
    }

    #[test]
    fn reset_returns_to_max_compression() {
        let mut env = FronthaulEnv::new(EnvSetup::default()).unwrap();
        let start = CompressionConfig { q: 6, b_w: 16, r_w: 4 };
        assert!(env.configs().iter().all(|c| *c == start));
        env.step_delta(Delta::RDown).unwrap();
        env.reset().unwrap();
        assert!(env.configs().iter().all(|c| *c == start));
        assert_eq!(env.next_cell(), 0);
    }

    #[test]
    fn reward_stays_within_bounds() {
        let setup = EnvSetup::default();
        let rho_max = oracle::max_cell_sum_util(&setup.sys, &setup.sets, setup.sys.n_prb_max).unwrap();
        let (lo, hi) = (-setup.reward.lambda * setup.reward.d, rho_max + setup.reward.lambda * (1.0 - setup.reward.d));
        let mut env = FronthaulEnv::new(setup).unwrap();
        for i in 0..300 {
            let delta = Delta::from_index((i * 5 + i / 7) % N_ACTIONS).unwrap();
            let (_, r, _) = env.step_delta(delta).unwrap();
            assert!(r >= lo && r <= hi, "reward {r} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn traces_repeat_under_fixed_seeds() {
        let run = || {
            let mut env = FronthaulEnv::new(EnvSetup::default()).unwrap();
            (0..50)
                .map(|i| env.step_delta(Delta::from_index(i % N_ACTIONS).unwrap()).unwrap().1)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_out_of_range_cell() {
        let mut env = FronthaulEnv::new(EnvSetup::default()).unwrap();
        assert!(env.step(EnvAction { cell: 3, delta: Delta::Noop }).is_err());
    }
}
