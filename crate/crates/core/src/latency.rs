//! Shared-link burst latency model.
//!
//! A fraction `alpha_burst` of the slot's aggregate fronthaul bits is
//! serialized at link rate ahead of any given packet, followed by a fixed
//! processing delay and a per-slot jitter common to all cells:
//!
//! ```text
//! L = alpha_burst * sum(bits) / C_FH + d_proc + U[0, jitter_max)
//! ```
//!
//! The model sits behind [`LatencyModel::slot_latency`] (per-cell bits in,
//! per-cell latencies out) so a queueing model can replace it later.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LATENCY_STREAM_OFFSET: u64 = 0x1a7e_0000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyModelConfig {
    pub alpha_burst: f64,
    pub d_proc_s: f64,
    pub jitter_max_s: f64,
    pub seed: u64,
}

impl Default for LatencyModelConfig {
    fn default() -> Self {
        Self { alpha_burst: 0.5, d_proc_s: 10e-6, jitter_max_s: 0.5e-6, seed: 2 }
    }
}

impl LatencyModelConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(self.alpha_burst) && ok(self.d_proc_s) && ok(self.jitter_max_s)) {
            return Err(Error::InvalidConfig("latency: parameters must be non-negative".into()));
        }
        if self.alpha_burst > 1.0 {
            return Err(Error::InvalidConfig("latency: alpha_burst must be <= 1".into()));
        }
        Ok(())
    }

    /// Latency excluding jitter for a slot carrying `total_bits` in aggregate.
    pub fn deterministic_latency(&self, total_bits: u64, c_fh_bps: f64) -> f64 {
        self.alpha_burst * total_bits as f64 / c_fh_bps + self.d_proc_s
    }

    /// Upper bound on the latency of a slot carrying `total_bits`.
    pub fn worst_case_latency(&self, total_bits: u64, c_fh_bps: f64) -> f64 {
        self.deterministic_latency(total_bits, c_fh_bps) + self.jitter_max_s
    }
}

/// Per-cell latency of one slot. Draws a single jitter sample shared by all
/// cells, so every returned value is equal.
pub fn slot_latency<R: Rng + ?Sized>(
    per_cell_bits: &[u64],
    k_cells: usize,
    c_fh_bps: f64,
    cfg: &LatencyModelConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if per_cell_bits.len() != k_cells {
        return Err(Error::DimensionMismatch { expected: k_cells, got: per_cell_bits.len() });
    }
    if !(c_fh_bps > 0.0) {
        return Err(Error::ZeroCapacity);
    }
    let jitter = cfg.jitter_max_s * rng.random::<f64>();
    let total: u64 = per_cell_bits.iter().sum();
    let latency = cfg.deterministic_latency(total, c_fh_bps) + jitter;
    Ok(vec![latency; k_cells])
}

/// Latency model with its own RNG stream.
#[derive(Debug, Clone)]
pub struct LatencyModel {
    cfg: LatencyModelConfig,
    k_cells: usize,
    rng: ChaCha8Rng,
}

impl LatencyModel {
    pub fn new(cfg: LatencyModelConfig, k_cells: usize) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(LATENCY_STREAM_OFFSET));
        Ok(Self { cfg, k_cells, rng })
    }

    pub fn config(&self) -> &LatencyModelConfig {
        &self.cfg
    }

    pub fn slot_latency(&mut self, per_cell_bits: &[u64], c_fh_bps: f64) -> Result<Vec<f64>> {
        slot_latency(per_cell_bits, self.k_cells, c_fh_bps, &self.cfg, &mut self.rng)
    }
}
