//! Ground-truth baselines: exhaustive search over static configurations and
//! exact value iteration for small tabular MDPs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::Environment;
use crate::error::{Error, Result};
use crate::fronthaul::{cell_bits, CompressionConfig, CompressionSets, SystemConfig};
use crate::latency::LatencyModelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityMode {
    /// Aggregate rate must not exceed the fronthaul capacity.
    Capacity,
    /// Latency with worst-case jitter must stay below `tau_max`.
    Latency,
}

impl std::str::FromStr for FeasibilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capacity" => Ok(Self::Capacity),
            "latency" => Ok(Self::Latency),
            other => Err(Error::InvalidConfig(format!("unknown feasibility mode {other:?}"))),
        }
    }
}

/// A configuration applied to every cell at a fixed load.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticEvaluation {
    pub config: CompressionConfig,
    /// Bits per slot summed over cells.
    pub aggregate_bits: u64,
    pub aggregate_rate_bps: f64,
    pub cell_sum_util: f64,
    pub worst_case_latency_s: f64,
    pub feasible: bool,
}

/// Evaluates every symmetric configuration at `n_prb` PRBs per cell, in
/// (q, b_w, r_w) lexicographic order.
pub fn evaluate_static_configs(
    sys: &SystemConfig,
    sets: &CompressionSets,
    n_prb: u32,
    latency: &LatencyModelConfig,
    tau_max_s: f64,
    mode: FeasibilityMode,
) -> Result<Vec<StaticEvaluation>> {
    sets.all_configs()
        .into_iter()
        .map(|config| {
            let (payload, weights) = cell_bits(sys, sets, n_prb, &config)?;
            let aggregate_bits = (payload + weights) * sys.k_cells as u64;
            let aggregate_rate_bps = aggregate_bits as f64 / sys.t_slot_s;
            let worst_case_latency_s = latency.worst_case_latency(aggregate_bits, sys.c_fh_bps);
            let feasible = match mode {
                FeasibilityMode::Capacity => aggregate_rate_bps <= sys.c_fh_bps,
                FeasibilityMode::Latency => worst_case_latency_s < tau_max_s,
            };
            Ok(StaticEvaluation {
                config,
                aggregate_bits,
                aggregate_rate_bps,
                cell_sum_util: aggregate_rate_bps / sys.c_fh_bps,
                worst_case_latency_s,
                feasible,
            })
        })
        .collect()
}

/// Tie-break order: more bits, then higher q, lower r_w, higher b_w.
fn rank(e: &StaticEvaluation) -> (u64, u32, std::cmp::Reverse<u32>, u32) {
    (e.aggregate_bits, e.config.q, std::cmp::Reverse(e.config.r_w), e.config.b_w)
}

/// The feasible symmetric configuration with the highest cell-sum
/// utilization at `n_prb` PRBs per cell.
pub fn best_static_config(
    sys: &SystemConfig,
    sets: &CompressionSets,
    n_prb: u32,
    latency: &LatencyModelConfig,
    tau_max_s: f64,
    mode: FeasibilityMode,
) -> Result<StaticEvaluation> {
    evaluate_static_configs(sys, sets, n_prb, latency, tau_max_s, mode)?
        .into_iter()
        .filter(|e| e.feasible)
        .max_by_key(rank)
        .ok_or(Error::Infeasible)
}

/// Best per-cell (possibly asymmetric) assignment at a fixed load, by
/// enumerating all `n_configs^K` combinations. Limited to `K <= 3`.
pub fn best_asymmetric_config(
    sys: &SystemConfig,
    sets: &CompressionSets,
    n_prb: u32,
    latency: &LatencyModelConfig,
    tau_max_s: f64,
    mode: FeasibilityMode,
) -> Result<(Vec<CompressionConfig>, f64)> {
    let k = sys.k_cells;
    if k > 3 {
        return Err(Error::InvalidConfig("asymmetric enumeration is limited to K <= 3".into()));
    }
    let per_cell: Vec<(CompressionConfig, u64)> = sets
        .all_configs()
        .into_iter()
        .map(|c| cell_bits(sys, sets, n_prb, &c).map(|(p, w)| (c, p + w)))
        .collect::<Result<_>>()?;
    let n = per_cell.len();
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut choice = vec![0usize; k];
    loop {
        let bits: u64 = choice.iter().map(|&i| per_cell[i].1).sum();
        let feasible = match mode {
            FeasibilityMode::Capacity => bits as f64 / sys.t_slot_s <= sys.c_fh_bps,
            FeasibilityMode::Latency => latency.worst_case_latency(bits, sys.c_fh_bps) < tau_max_s,
        };
        if feasible && best.as_ref().is_none_or(|(b, _)| bits > *b) {
            best = Some((bits, choice.clone()));
        }
        // Odometer increment over the K cell choices.
        let mut pos = 0;
        loop {
            if pos == k {
                let (bits, idx) = best.ok_or(Error::Infeasible)?;
                let configs = idx.iter().map(|&i| per_cell[i].0).collect();
                return Ok((configs, bits as f64 / sys.t_slot_s / sys.c_fh_bps));
            }
            choice[pos] += 1;
            if choice[pos] < n {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Largest cell-sum utilization any symmetric configuration reaches at
/// `n_prb` PRBs, feasible or not.
pub fn max_cell_sum_util(sys: &SystemConfig, sets: &CompressionSets, n_prb: u32) -> Result<f64> {
    let evals = evaluate_static_configs(
        sys,
        sets,
        n_prb,
        &LatencyModelConfig::default(),
        f64::INFINITY,
        FeasibilityMode::Latency,
    )?;
    Ok(evals.iter().map(|e| e.cell_sum_util).fold(0.0, f64::max))
}

/// Finite MDP with explicit transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transitions[s][a][s']`.
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// `rewards[s][a]`.
    pub rewards: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl TabularMdp {
    pub fn validate(&self) -> Result<()> {
        let dims_ok = self.transitions.len() == self.n_states
            && self.rewards.len() == self.n_states
            && self.transitions.iter().all(|row| {
                row.len() == self.n_actions && row.iter().all(|p| p.len() == self.n_states)
            })
            && self.rewards.iter().all(|r| r.len() == self.n_actions);
        if !dims_ok {
            return Err(Error::InvalidConfig("tabular MDP dimensions are inconsistent".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig("tabular MDP gamma must be in [0, 1)".into()));
        }
        for (s, row) in self.transitions.iter().enumerate() {
            for (a, probs) in row.iter().enumerate() {
                let sum: f64 = probs.iter().sum();
                if probs.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::NonStochastic { state: s, action: a, sum });
                }
            }
        }
        Ok(())
    }

    /// Deterministic MDP from a successor table `next[s][a]`.
    pub fn deterministic(next: &[Vec<usize>], rewards: Vec<Vec<f64>>, gamma: f64) -> Self {
        let n_states = next.len();
        let n_actions = next.first().map_or(0, Vec::len);
        let transitions = next
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&sp| {
                        let mut p = vec![0.0; n_states];
                        p[sp] = 1.0;
                        p
                    })
                    .collect()
            })
            .collect();
        Self { n_states, n_actions, transitions, rewards, gamma }
    }
}

/// Optimal action values and the sup-norm change of the final backup.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub q: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

impl QTable {
    pub fn greedy_policy(&self) -> Vec<usize> {
        self.q.iter().map(|row| argmax(row)).collect()
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub const VALUE_ITERATION_TOL: f64 = 1e-10;

/// Bellman optimality backups until the sup-norm change drops below
/// [`VALUE_ITERATION_TOL`].
pub fn value_iteration(mdp: &TabularMdp) -> Result<QTable> {
    mdp.validate()?;
    let mut q = vec![vec![0.0; mdp.n_actions]; mdp.n_states];
    let mut iterations = 0;
    loop {
        let v: Vec<f64> =
            q.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let mut residual = 0.0_f64;
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                let expected: f64 =
                    mdp.transitions[s][a].iter().zip(&v).map(|(p, vs)| p * vs).sum();
                let updated = mdp.rewards[s][a] + mdp.gamma * expected;
                residual = residual.max((updated - q[s][a]).abs());
                q[s][a] = updated;
            }
        }
        iterations += 1;
        if residual < VALUE_ITERATION_TOL {
            return Ok(QTable { q, residual, iterations });
        }
    }
}

/// Five-state chain with actions left (0) and right (1), gamma 0.9.
///
/// Moving right from the last state pays 1 and stays; moving left from the
/// first state pays 0.7 and stays. Collecting 0.7 forever from state 0 beats
/// walking four steps to the right end, so the optimal policy is "left" in
/// state 0 and "right" everywhere else.
pub fn chain_fixture() -> TabularMdp {
    let n: usize = 5;
    let next: Vec<Vec<usize>> =
        (0..n).map(|s| vec![s.saturating_sub(1), (s + 1).min(n - 1)]).collect();
    let mut rewards = vec![vec![0.0; 2]; n];
    rewards[0][0] = 0.7;
    rewards[n - 1][1] = 1.0;
    TabularMdp::deterministic(&next, rewards, 0.9)
}

/// A [`TabularMdp`] as a learning environment with one-hot observations.
/// Episodes start in a uniformly random state.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    mdp: TabularMdp,
    state: usize,
    rng: ChaCha8Rng,
}

impl TabularEnv {
    pub fn new(mdp: TabularMdp, seed: u64) -> Result<Self> {
        mdp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = rng.random_range(0..mdp.n_states);
        Ok(Self { mdp, state, rng })
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }

    pub fn one_hot(&self, s: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.mdp.n_states];
        x[s] = 1.0;
        x
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl Environment for TabularEnv {
    type Info = usize;

    fn n_actions(&self) -> usize {
        self.mdp.n_actions
    }

    fn observe(&self) -> Vec<f64> {
        self.one_hot(self.state)
    }

    fn reset(&mut self) -> Result<()> {
        self.state = self.rng.random_range(0..self.mdp.n_states);
        Ok(())
    }

    fn step(&mut self, action: usize) -> Result<(f64, usize)> {
        if action >= self.mdp.n_actions {
            return Err(Error::IndexOutOfRange { index: action, len: self.mdp.n_actions });
        }
        let reward = self.mdp.rewards[self.state][action];
        let u: f64 = self.rng.random();
        let probs = &self.mdp.transitions[self.state][action];
        let mut acc = 0.0;
        let mut next = probs.len() - 1;
        for (sp, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                next = sp;
                break;
            }
        }
        self.state = next;
        Ok((reward, next))
    }
}
