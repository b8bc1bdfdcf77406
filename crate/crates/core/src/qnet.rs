//! Fully connected Q-network with hand-written backpropagation.
//!
//! All parameters live in one flat `Vec<f64>`. Each layer stores its weight
//! matrix as `[fan_in][fan_out]` row-major, followed by `fan_out` biases.
//! Hidden layers use ReLU; the output layer is linear.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::ddqn_targets;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    pub init_seed: u64,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, output_dim: usize, init_seed: u64) -> Self {
        Self { input_dim, hidden_dims, output_dim, activation: Activation::Relu, init_seed }
    }

    fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.output_dim);
        dims
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_dims().contains(&0) {
            return Err(Error::InvalidConfig("network dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.layer_dims().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Same architecture, ignoring the initialization seed.
    pub fn same_shape(&self, other: &MlpSpec) -> bool {
        self.layer_dims() == other.layer_dims() && self.activation == other.activation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    w: usize,
    b: usize,
}

impl Layer {
    fn end(&self) -> usize {
        self.b + self.fan_out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    layers: Vec<Layer>,
    params: Vec<f64>,
}

impl Mlp {
    /// Uniform fan-in initialization: weights and biases drawn from
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` with a seeded generator.
    pub fn new(spec: MlpSpec) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(net.spec.init_seed);
        for layer in net.layers.clone() {
            let bound = 1.0 / (layer.fan_in as f64).sqrt();
            for p in &mut net.params[layer.w..layer.end()] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let mut layers = Vec::new();
        let mut offset = 0;
        for w in spec.layer_dims().windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            layers.push(Layer { fan_in, fan_out, w: offset, b: offset + fan_in * fan_out });
            offset += fan_in * fan_out + fan_out;
        }
        Ok(Self { spec, layers, params: vec![0.0; offset] })
    }

    pub fn from_params(spec: MlpSpec, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch { expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    /// Weight connecting input `i` of `layer` to its output `o`.
    pub fn weight_index(&self, layer: usize, i: usize, o: usize) -> usize {
        let l = &self.layers[layer];
        l.w + i * l.fan_out + o
    }

    pub fn bias_index(&self, layer: usize, o: usize) -> usize {
        self.layers[layer].b + o
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut acts = self.trace(x);
        Ok(acts.pop().unwrap_or_default())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch { expected: self.spec.input_dim, got: x.len() });
        }
        Ok(())
    }

    /// Activations of every layer, input first, output last.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let input = &acts[li];
            let mut out = self.params[layer.b..layer.end()].to_vec();
            for (i, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &self.params[layer.w + i * layer.fan_out..layer.w + (i + 1) * layer.fan_out];
                for (o, w) in out.iter_mut().zip(row) {
                    *o += xi * w;
                }
            }
            if li < last {
                for o in &mut out {
                    *o = o.max(0.0);
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Adds `d(out_grad · Q(x)) / dθ` into `grad`.
    fn backprop(&self, acts: &[Vec<f64>], out_grad: &[f64], grad: &mut [f64]) {
        let mut delta = out_grad.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = self.layers[li];
            let input = &acts[li];
            for (g, d) in grad[layer.b..layer.end()].iter_mut().zip(&delta) {
                *g += d;
            }
            for (i, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = layer.w + i * layer.fan_out..layer.w + (i + 1) * layer.fan_out;
                for (g, d) in grad[row].iter_mut().zip(&delta) {
                    *g += xi * d;
                }
            }
            if li == 0 {
                break;
            }
            // Hidden activations are ReLU outputs: zero exactly where inactive.
            let mut prev = vec![0.0; layer.fan_in];
            for (i, p) in prev.iter_mut().enumerate() {
                if input[i] <= 0.0 {
                    continue;
                }
                let row = &self.params[layer.w + i * layer.fan_out..layer.w + (i + 1) * layer.fan_out];
                *p = dot(row, &delta);
            }
            delta = prev;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for j in 0..4 {
            acc[j] += a[4 * c + j] * b[4 * c + j];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..a.len() {
        s += a[j] * b[j];
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, learning_rate: f64, n_params: usize) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(Self {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        })
    }

    pub fn adam(learning_rate: f64, n_params: usize) -> Result<Self> {
        Self::new(OptimizerKind::Adam, learning_rate, n_params)
    }

    pub fn sgd(learning_rate: f64, n_params: usize) -> Result<Self> {
        Self::new(OptimizerKind::Sgd, learning_rate, n_params)
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One descent step along `grad`.
    pub fn apply(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != grad.len() || grad.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), got: grad.len() });
        }
        self.t += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2) = (self.beta1, self.beta2);
                let c1 = 1.0 - b1.powi(self.t.min(i32::MAX as u64) as i32);
                let c2 = 1.0 - b2.powi(self.t.min(i32::MAX as u64) as i32);
                for i in 0..params.len() {
                    let g = grad[i];
                    self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
                    self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
                    let m_hat = self.m[i] / c1;
                    let v_hat = self.v[i] / c2;
                    params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
        }
        Ok(())
    }
}

/// One stored experience `(s, a, r, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Loss, gradient and TD errors of one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    /// `mean_i w_i * (y_i - Q(s_i, a_i))^2 / 2`.
    pub loss: f64,
    pub grad: Vec<f64>,
    /// `|y_i - Q(s_i, a_i)|`.
    pub td_errors: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Importance-weighted squared TD loss against double-DQN targets, and its
/// gradient with respect to the online parameters.
pub fn loss_and_gradient(
    net: &Mlp,
    target_net: &Mlp,
    batch: &[Transition],
    weights: &[f64],
    gamma: f64,
) -> Result<BatchGradient> {
    if weights.len() != batch.len() {
        return Err(Error::DimensionMismatch { expected: batch.len(), got: weights.len() });
    }
    if batch.is_empty() {
        return Err(Error::BufferUnderfilled { size: 0, requested: 1 });
    }
    if !net.spec.same_shape(&target_net.spec) {
        return Err(Error::ArchitectureMismatch);
    }
    let targets = ddqn_targets(batch, net, target_net, gamma)?;
    let n = batch.len() as f64;
    let mut grad = vec![0.0; net.n_params()];
    let mut loss = 0.0;
    let mut td_errors = Vec::with_capacity(batch.len());
    let mut out_grad = vec![0.0; net.output_dim()];
    for ((t, &w), &y) in batch.iter().zip(weights).zip(&targets) {
        net.check_input(&t.state)?;
        if t.action >= net.output_dim() {
            return Err(Error::IndexOutOfRange { index: t.action, len: net.output_dim() });
        }
        let acts = net.trace(&t.state);
        let q = acts[acts.len() - 1][t.action];
        let err = y - q;
        loss += w * 0.5 * err * err / n;
        td_errors.push(err.abs());
        out_grad.iter_mut().for_each(|g| *g = 0.0);
        out_grad[t.action] = -w * err / n;
        net.backprop(&acts, &out_grad, &mut grad);
    }
    Ok(BatchGradient { loss, grad, td_errors, targets })
}

/// One optimizer update of `net` on the importance-weighted TD loss.
/// `target_net` is read but never modified. Returns the loss and per-sample
/// absolute TD errors.
pub fn train_step(
    net: &mut Mlp,
    target_net: &Mlp,
    batch: &[Transition],
    importance_weights: &[f64],
    gamma: f64,
    opt: &mut OptimizerState,
) -> Result<(f64, Vec<f64>)> {
    let g = loss_and_gradient(net, target_net, batch, importance_weights, gamma)?;
    if !g.loss.is_finite() || g.grad.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteLoss { step: opt.steps() });
    }
    opt.apply(&mut net.params, &g.grad)?;
    Ok((g.loss, g.td_errors))
}

/// `target <- (1 - kappa) * target + kappa * online`, parameter-wise.
pub fn soft_update(target_net: &mut Mlp, net: &Mlp, kappa: f64) -> Result<()> {
    if !net.spec.same_shape(&target_net.spec) {
        return Err(Error::ArchitectureMismatch);
    }
    if kappa == 1.0 {
        target_net.params.copy_from_slice(&net.params);
        return Ok(());
    }
    for (t, o) in target_net.params.iter_mut().zip(&net.params) {
        *t = (1.0 - kappa) * *t + kappa * o;
    }
    Ok(())
}

pub const CHECKPOINT_FORMAT: &str = "fhc-checkpoint/v1";

/// Online and target parameters with the metadata needed to rebuild them.
/// Stored as JSON; floats are written in shortest round-trip form, so
/// save/load is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub spec: MlpSpec,
    pub seeds: BTreeMap<String, u64>,
    /// Decision steps trained when the checkpoint was taken.
    pub step: u64,
    pub online: Vec<f64>,
    pub target: Vec<f64>,
}

impl Checkpoint {
    pub fn new(net: &Mlp, target: &Mlp, seeds: BTreeMap<String, u64>, step: u64) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            spec: net.spec.clone(),
            seeds,
            step,
            online: net.params.clone(),
            target: target.params.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Self = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unsupported format {:?}", ckpt.format)));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn networks(&self) -> Result<(Mlp, Mlp)> {
        Ok((
            Mlp::from_params(self.spec.clone(), self.online.clone())?,
            Mlp::from_params(self.spec.clone(), self.target.clone())?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(hidden: Vec<usize>) -> MlpSpec {
        MlpSpec::new(5, hidden, 7, 42)
    }

    fn random_input(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.5)).collect()
    }

    /// Forward pass written against nested matrices, independent of the flat layout.
    fn reference_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
        let dims = net.spec().layer_dims();
        let mut offset = 0;
        let mut a = x.to_vec();
        for (l, w) in dims.windows(2).enumerate() {
            let (fi, fo) = (w[0], w[1]);
            let mat: Vec<Vec<f64>> = (0..fi)
                .map(|i| net.params()[offset + i * fo..offset + (i + 1) * fo].to_vec())
                .collect();
            let bias = &net.params()[offset + fi * fo..offset + fi * fo + fo];
            let mut out = vec![0.0; fo];
            for o in 0..fo {
                let mut s = bias[o];
                for i in 0..fi {
                    s += mat[i][o] * a[i];
                }
                out[o] = if l + 2 < dims.len() { s.max(0.0) } else { s };
            }
            a = out;
            offset += fi * fo + fo;
        }
        a
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(spec(vec![8])).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn linear_network_picks_weight_row() {
        let mut net = Mlp::zeros(spec(vec![])).unwrap();
        for (k, p) in net.params_mut().iter_mut().enumerate() {
            *p = k as f64;
        }
        for i in 0..5 {
            let mut x = vec![0.0; 5];
            x[i] = 1.0;
            let q = net.forward(&x).unwrap();
            let expected: Vec<f64> = (0..7)
                .map(|o| net.params()[net.weight_index(0, i, o)] + net.params()[net.bias_index(0, o)])
                .collect();
            assert_eq!(q, expected);
        }
        // With zero biases the output is exactly the weight row of input i.
        let mut net = Mlp::zeros(spec(vec![])).unwrap();
        let idx = net.weight_index(0, 2, 4);
        net.params_mut()[idx] = 3.5;
        let q = net.forward(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(q, vec![0.0, 0.0, 0.0, 0.0, 3.5, 0.0, 0.0]);
    }

    #[test]
    fn forward_matches_reference() {
        let net = Mlp::new(MlpSpec::new(15, vec![32, 16], 7, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let x = random_input(&mut rng, 15);
            let got = net.forward(&x).unwrap();
            let want = reference_forward(&net, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0));
            }
            assert_eq!(got, net.forward(&x).unwrap());
        }
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let net = Mlp::new(spec(vec![8])).unwrap();
        assert!(matches!(net.forward(&[1.0; 4]), Err(Error::DimensionMismatch { expected: 5, got: 4 })));
    }

    fn sample_batch(rng: &mut ChaCha8Rng, n: usize) -> Vec<Transition> {
        (0..n)
            .map(|_| Transition {
                state: random_input(rng, 5),
                action: rng.random_range(0..7),
                reward: rng.random_range(-1.0..1.0),
                next_state: random_input(rng, 5),
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let net = Mlp::new(spec(vec![8])).unwrap();
        let target = Mlp::new(MlpSpec { init_seed: 43, ..spec(vec![8]) }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = sample_batch(&mut rng, 1);
        let w = [1.0];
        let g = loss_and_gradient(&net, &target, &batch, &w, 0.95).unwrap();
        let h = 1e-5;
        let mut worst = 0.0_f64;
        for p in 0..net.n_params() {
            let mut plus = net.clone();
            plus.params_mut()[p] += h;
            let mut minus = net.clone();
            minus.params_mut()[p] -= h;
            let lp = loss_and_gradient(&plus, &target, &batch, &w, 0.95).unwrap().loss;
            let lm = loss_and_gradient(&minus, &target, &batch, &w, 0.95).unwrap().loss;
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - g.grad[p]).abs() / fd.abs().max(g.grad[p].abs()).max(1e-8);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn zero_error_batch_is_a_fixed_point() {
        let net = Mlp::new(spec(vec![8])).unwrap();
        let target = net.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut batch = sample_batch(&mut rng, 4);
        // Choose rewards so the double-DQN target equals the current estimate.
        let gamma = 0.9;
        for t in &mut batch {
            let q = net.forward(&t.state).unwrap()[t.action];
            let next = net.forward(&t.next_state).unwrap();
            let best = crate::oracle::argmax(&next);
            t.reward = q - gamma * next[best];
        }
        let mut trained = net.clone();
        let mut opt = OptimizerState::adam(1e-3, net.n_params()).unwrap();
        let (loss, td) = train_step(&mut trained, &target, &batch, &[1.0; 4], gamma, &mut opt).unwrap();
        assert!(loss < 1e-28);
        assert!(td.iter().all(|e| *e < 1e-13));
        for (a, b) in trained.params().iter().zip(net.params()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn importance_weights_scale_loss_and_gradient() {
        let net = Mlp::new(spec(vec![8])).unwrap();
        let target = Mlp::new(MlpSpec { init_seed: 5, ..spec(vec![8]) }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = sample_batch(&mut rng, 6);
        let w: Vec<f64> = (0..6).map(|i| 0.2 + 0.1 * i as f64).collect();
        let w2: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
        let a = loss_and_gradient(&net, &target, &batch, &w, 0.95).unwrap();
        let b = loss_and_gradient(&net, &target, &batch, &w2, 0.95).unwrap();
        assert!((b.loss - 2.0 * a.loss).abs() < 1e-12 * a.loss.abs().max(1.0));
        for (x, y) in a.grad.iter().zip(&b.grad) {
            assert!((y - 2.0 * x).abs() < 1e-12);
        }
        assert_eq!(a.td_errors, b.td_errors);
    }

    #[test]
    fn train_step_leaves_target_untouched() {
        let mut net = Mlp::new(spec(vec![8])).unwrap();
        let target = Mlp::new(MlpSpec { init_seed: 6, ..spec(vec![8]) }).unwrap();
        let before = target.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let batch = sample_batch(&mut rng, 8);
        let mut opt = OptimizerState::sgd(1e-2, net.n_params()).unwrap();
        let (l0, _) = train_step(&mut net, &target, &batch, &[1.0; 8], 0.5, &mut opt).unwrap();
        for _ in 0..50 {
            train_step(&mut net, &target, &batch, &[1.0; 8], 0.5, &mut opt).unwrap();
        }
        let after = loss_and_gradient(&net, &target, &batch, &[1.0; 8], 0.5).unwrap().loss;
        assert_eq!(target, before);
        assert!(after < l0);
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let mut net = Mlp::new(spec(vec![8])).unwrap();
        let target = net.clone();
        let batch = vec![Transition {
            state: vec![0.0; 5],
            action: 0,
            reward: f64::NAN,
            next_state: vec![0.0; 5],
        }];
        let mut opt = OptimizerState::adam(1e-3, net.n_params()).unwrap();
        let before = net.clone();
        let res = train_step(&mut net, &target, &batch, &[1.0], 0.9, &mut opt);
        assert!(matches!(res, Err(Error::NonFiniteLoss { .. })));
        assert_eq!(net, before);
    }

    #[test]
    fn soft_update_examples() {
        let online = Mlp::new(spec(vec![8])).unwrap();
        let mut target = Mlp::new(MlpSpec { init_seed: 77, ..spec(vec![8]) }).unwrap();
        let original = target.clone();
        soft_update(&mut target, &online, 0.0).unwrap();
        assert_eq!(target, original);
        soft_update(&mut target, &online, 1.0).unwrap();
        assert_eq!(target.params(), online.params());

        let mut t = Mlp::zeros(spec(vec![])).unwrap();
        let mut o = Mlp::zeros(spec(vec![])).unwrap();
        o.params_mut().iter_mut().for_each(|p| *p = 2.0);
        soft_update(&mut t, &o, 0.5).unwrap();
        assert!(t.params().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn soft_update_contracts_distance() {
        let online = Mlp::new(spec(vec![8])).unwrap();
        let mut target = Mlp::new(MlpSpec { init_seed: 8, ..spec(vec![8]) }).unwrap();
        let dist = |a: &Mlp, b: &Mlp| {
            a.params().iter().zip(b.params()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        let kappa = 5e-3;
        let d0 = dist(&target, &online);
        soft_update(&mut target, &online, kappa).unwrap();
        let d1 = dist(&target, &online);
        assert!((d1 - (1.0 - kappa) * d0).abs() < 1e-12 * d0);
    }

    #[test]
    fn soft_update_rejects_mismatch() {
        let online = Mlp::new(spec(vec![8])).unwrap();
        let mut target = Mlp::new(spec(vec![9])).unwrap();
        assert!(matches!(soft_update(&mut target, &online, 0.1), Err(Error::ArchitectureMismatch)));
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let net = Mlp::new(MlpSpec::new(15, vec![16, 16], 7, 11)).unwrap();
        let mut target = net.clone();
        for p in target.params_mut() {
            *p = *p / 3.0 + 1e-300;
        }
        let seeds = BTreeMap::from([("init".to_string(), 11), ("train".to_string(), u64::MAX)]);
        let ckpt = Checkpoint::new(&net, &target, seeds, 123);
        let back = Checkpoint::from_json(&ckpt.to_json().unwrap()).unwrap();
        assert_eq!(back, ckpt);
        let (n2, t2) = back.networks().unwrap();
        let bits = |m: &Mlp| m.params().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&n2), bits(&net));
        assert_eq!(bits(&t2), bits(&target));
    }

    #[test]
    fn checkpoint_rejects_wrong_format() {
        let net = Mlp::new(spec(vec![4])).unwrap();
        let mut ckpt = Checkpoint::new(&net, &net, BTreeMap::new(), 0);
        ckpt.format = "other".into();
        let text = ckpt.to_json().unwrap();
        assert!(Checkpoint::from_json(&text).is_err());
    }
}
