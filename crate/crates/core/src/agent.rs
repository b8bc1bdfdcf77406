//! Double-DQN learner with proportional prioritized replay and Boltzmann
//! exploration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::argmax;
use crate::qnet::{soft_update, train_step, Mlp, MlpSpec, OptimizerKind, OptimizerState, Transition};

/// An environment the learner can interact with.
pub trait Environment {
    /// Per-step diagnostics passed through to the caller.
    type Info;

    fn n_actions(&self) -> usize;

    /// Network input for the current state.
    fn observe(&self) -> Vec<f64>;

    fn reset(&mut self) -> Result<()>;

    /// Applies `action`; returns the reward and diagnostics.
    fn step(&mut self, action: usize) -> Result<(f64, Self::Info)>;
}

/// Binary sum tree over `capacity` leaves, rounded up to a power of two.
#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        Self { leaves, nodes: vec![0.0; 2 * leaves] }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut node = self.leaves + i;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, for `mass` in `[0, total)`.
    pub fn find(&self, mut mass: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = 2 * node;
            if mass < self.nodes[left] || self.nodes[left + 1] <= 0.0 {
                node = left;
            } else {
                mass -= self.nodes[left];
                node = left + 1;
            }
        }
        node - self.leaves
    }
}

/// A sampled minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySample {
    pub transitions: Vec<Transition>,
    pub indices: Vec<usize>,
    /// Importance weights, normalized so the largest in the batch is 1.
    pub weights: Vec<f64>,
}

/// Ring buffer of transitions sampled in proportion to `priority^alpha`.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    priorities: Vec<f64>,
    tree: SumTree,
    next: usize,
    alpha: f64,
    eps: f64,
    max_priority: f64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, alpha: f64, eps: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be positive".into()));
        }
        if !(eps > 0.0) || !(alpha >= 0.0) {
            return Err(Error::InvalidConfig("replay: need eps > 0 and alpha >= 0".into()));
        }
        Ok(Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            priorities: Vec::with_capacity(capacity.min(1 << 16)),
            tree: SumTree::new(capacity),
            next: 0,
            alpha,
            eps,
            max_priority: eps,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn priority(&self, i: usize) -> Option<f64> {
        self.priorities.get(i).copied()
    }

    pub fn transition(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    /// Sampling probability of slot `i`.
    pub fn probability(&self, i: usize) -> Option<f64> {
        (i < self.len()).then(|| self.tree.get(i) / self.tree.total())
    }

    /// Stores `t` with the largest priority seen so far, evicting the oldest
    /// entry once full.
    pub fn push(&mut self, t: Transition) {
        let p = self.max_priority.max(self.eps);
        let slot = self.next;
        if slot == self.items.len() {
            self.items.push(t);
            self.priorities.push(p);
        } else {
            self.items[slot] = t;
            self.priorities[slot] = p;
        }
        self.tree.set(slot, p.powf(self.alpha));
        self.next = (self.next + 1) % self.capacity;
    }

    /// Draws `batch_size` indices with replacement, `P(i) ∝ p_i^alpha`, and
    /// importance weights `(N P(i))^-beta` scaled by their batch maximum.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        beta: f64,
        rng: &mut R,
    ) -> Result<ReplaySample> {
        if self.len() < batch_size || batch_size == 0 {
            return Err(Error::BufferUnderfilled { size: self.len(), requested: batch_size });
        }
        let total = self.tree.total();
        let n = self.len() as f64;
        let mut indices = Vec::with_capacity(batch_size);
        let mut weights = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let mass = rng.random::<f64>() * total;
            let i = self.tree.find(mass).min(self.len() - 1);
            let prob = self.tree.get(i) / total;
            indices.push(i);
            weights.push((n * prob).powf(-beta));
        }
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        for w in &mut weights {
            *w /= max_w;
        }
        let transitions = indices.iter().map(|&i| self.items[i].clone()).collect();
        Ok(ReplaySample { transitions, indices, weights })
    }

    /// Sets `p_i = |td_i| + eps`.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<()> {
        if indices.len() != td_errors.len() {
            return Err(Error::DimensionMismatch { expected: indices.len(), got: td_errors.len() });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.len() });
        }
        for (&i, td) in indices.iter().zip(td_errors) {
            let p = td.abs() + self.eps;
            self.priorities[i] = p;
            self.max_priority = self.max_priority.max(p);
            self.tree.set(i, p.powf(self.alpha));
        }
        Ok(())
    }
}

/// Boltzmann temperature with multiplicative decay per gradient update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSchedule {
    pub alpha_temp: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        Self { alpha_temp: 1.0, decay: 0.995, floor: 0.01 }
    }
}

impl ExplorationSchedule {
    pub fn temperature(&self) -> f64 {
        self.alpha_temp.max(self.floor)
    }

    pub fn anneal(&mut self) {
        self.alpha_temp = (self.alpha_temp * self.decay).max(self.floor);
    }
}

/// `exp(Q/alpha) / sum exp(Q/alpha)`, evaluated after subtracting max(Q).
pub fn boltzmann_probabilities(q_values: &[f64], alpha: f64) -> Vec<f64> {
    let max = q_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q_values.iter().map(|q| ((q - max) / alpha).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Samples an action from the Boltzmann distribution at the schedule's
/// current temperature.
pub fn select_action<R: Rng + ?Sized>(
    q_values: &[f64],
    schedule: &ExplorationSchedule,
    rng: &mut R,
) -> usize {
    let probs = boltzmann_probabilities(q_values, schedule.temperature());
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return a;
        }
    }
    // Rounding left `acc` just short of 1; fall back to the most likely action.
    argmax(&probs)
}

pub fn greedy_action(q_values: &[f64]) -> usize {
    argmax(q_values)
}

/// `y_i = r_i + gamma * Q_target(s'_i, argmax_a Q_online(s'_i, a))`.
/// Every transition bootstraps; there are no terminal states.
pub fn ddqn_targets(batch: &[Transition], net: &Mlp, target_net: &Mlp, gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            let online = net.forward(&t.next_state)?;
            let a_star = argmax(&online);
            let evaluated = target_net.forward(&t.next_state)?;
            Ok(t.reward + gamma * evaluated[a_star])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Discount factor; a run config copies it from the reward section.
    #[serde(skip, default = "default_gamma")]
    pub gamma: f64,
    pub batch_size: usize,
    /// Transitions collected before the first update.
    pub warmup: usize,
    pub updates_per_step: usize,
    /// Soft target-update rate.
    pub kappa: f64,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub hidden_dims: Vec<usize>,
    pub buffer_capacity: usize,
    pub alpha_per: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    pub priority_eps: f64,
    pub temperature: ExplorationSchedule,
    /// Decision steps to train for.
    pub total_steps: u64,
    /// Decision steps per episode before the environment is reset.
    pub episode_len: u64,
    pub seed: u64,
    pub init_seed: u64,
}

fn default_gamma() -> f64 {
    0.95
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            batch_size: 64,
            warmup: 500,
            updates_per_step: 1,
            kappa: 5e-3,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            hidden_dims: vec![128, 128],
            buffer_capacity: 100_000,
            alpha_per: 0.6,
            beta_start: 0.4,
            beta_end: 1.0,
            priority_eps: 1e-6,
            temperature: ExplorationSchedule::default(),
            total_steps: 20_000,
            episode_len: 200,
            seed: 3,
            init_seed: 4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("agent: {m}")));
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must be in [0, 1)");
        }
        if self.batch_size == 0 || self.batch_size > self.warmup || self.warmup > self.buffer_capacity {
            return bad("need 0 < batch_size <= warmup <= buffer_capacity");
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad("kappa must be in [0, 1]");
        }
        let t = &self.temperature;
        if !(t.floor > 0.0 && t.alpha_temp > 0.0 && t.decay > 0.0 && t.decay <= 1.0) {
            return bad("temperature, floor and decay must be positive (decay <= 1)");
        }
        if self.episode_len == 0 {
            return bad("episode_len must be positive");
        }
        Ok(())
    }

    /// Importance exponent after `step` decision steps.
    pub fn beta_at(&self, step: u64) -> f64 {
        let frac = if self.total_steps == 0 {
            1.0
        } else {
            (step as f64 / self.total_steps as f64).min(1.0)
        };
        self.beta_start + (self.beta_end - self.beta_start) * frac
    }
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub step: u64,
    pub action: usize,
    pub reward: f64,
    /// Mean loss of this step's updates; `None` during warmup.
    pub loss: Option<f64>,
    pub temperature: f64,
    pub beta_per: f64,
}

/// Online and target networks plus replay memory and exploration state.
#[derive(Debug, Clone)]
pub struct Learner {
    cfg: TrainConfig,
    pub net: Mlp,
    pub target: Mlp,
    opt: OptimizerState,
    buffer: ReplayBuffer,
    schedule: ExplorationSchedule,
    rng: ChaCha8Rng,
    step: u64,
}

impl Learner {
    pub fn new(cfg: TrainConfig, input_dim: usize, n_actions: usize) -> Result<Self> {
        cfg.validate()?;
        let spec = MlpSpec::new(input_dim, cfg.hidden_dims.clone(), n_actions, cfg.init_seed);
        let net = Mlp::new(spec)?;
        let target = net.clone();
        let opt = OptimizerState::new(cfg.optimizer, cfg.learning_rate, net.n_params())?;
        let buffer = ReplayBuffer::new(cfg.buffer_capacity, cfg.alpha_per, cfg.priority_eps)?;
        Ok(Self {
            schedule: cfg.temperature,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            net,
            target,
            opt,
            buffer,
            step: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn temperature(&self) -> f64 {
        self.schedule.temperature()
    }

    pub fn act(&mut self, obs: &[f64]) -> Result<usize> {
        let q = self.net.forward(obs)?;
        Ok(select_action(&q, &self.schedule, &mut self.rng))
    }

    /// Stores a transition and, past warmup, runs the configured number of
    /// updates. Returns the mean loss if any update ran.
    pub fn observe(&mut self, t: Transition) -> Result<Option<f64>> {
        self.buffer.push(t);
        let beta = self.cfg.beta_at(self.step);
        let mut loss = None;
        if self.buffer.len() >= self.cfg.warmup {
            let mut total = 0.0;
            for _ in 0..self.cfg.updates_per_step {
                total += self.update(beta)?;
            }
            loss = Some(total / self.cfg.updates_per_step.max(1) as f64);
        }
        self.step += 1;
        Ok(loss)
    }

    fn update(&mut self, beta: f64) -> Result<f64> {
        let batch = self.buffer.sample(self.cfg.batch_size, beta, &mut self.rng)?;
        let (loss, td) = train_step(
            &mut self.net,
            &self.target,
            &batch.transitions,
            &batch.weights,
            self.cfg.gamma,
            &mut self.opt,
        )
        .map_err(|e| match e {
            Error::NonFiniteLoss { .. } => Error::NonFiniteLoss { step: self.step },
            other => other,
        })?;
        soft_update(&mut self.target, &self.net, self.cfg.kappa)?;
        self.buffer.update_priorities(&batch.indices, &td)?;
        self.schedule.anneal();
        Ok(loss)
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct Trained {
    pub learner: Learner,
    pub log: Vec<TrainRecord>,
}

/// Runs the learner against `env` for `cfg.total_steps` decision steps,
/// resetting the environment every `cfg.episode_len` steps. `on_step` sees
/// every log row with the environment's diagnostics and the learner state.
pub fn train<E, F>(env: &mut E, cfg: &TrainConfig, mut on_step: F) -> Result<Trained>
where
    E: Environment,
    F: FnMut(&TrainRecord, &E::Info, &Learner) -> Result<()>,
{
    let obs_dim = env.observe().len();
    let mut learner = Learner::new(cfg.clone(), obs_dim, env.n_actions())?;
    let mut log = Vec::with_capacity(cfg.total_steps.min(1 << 20) as usize);
    for step in 0..cfg.total_steps {
        let state = env.observe();
        let action = learner.act(&state)?;
        let (reward, info) = env.step(action)?;
        let next_state = env.observe();
        let beta_per = cfg.beta_at(step);
        let loss = learner.observe(Transition { state, action, reward, next_state })?;
        let record =
            TrainRecord { step, action, reward, loss, temperature: learner.temperature(), beta_per };
        on_step(&record, &info, &learner)?;
        log.push(record);
        if (step + 1) % cfg.episode_len == 0 {
            env.reset()?;
        }
    }
    Ok(Trained { learner, log })
}
