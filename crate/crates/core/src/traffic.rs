//! Scheduled-PRB process: a Gaussian around the mean load, rounded to an
//! integer and clamped into `[1, n_prb_max]`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-cell stream offsets are added to the master seed.
const CELL_STREAM_OFFSET: u64 = 0x5eed_0000;

fn default_n_prb_max() -> u32 {
    273
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub mean_prb: f64,
    /// Standard deviation of the scheduled PRB count.
    pub sigma_prb: f64,
    /// Taken from the system configuration when a run is resolved.
    #[serde(skip, default = "default_n_prb_max")]
    pub n_prb_max: u32,
    pub seed: u64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self { mean_prb: 175.0, sigma_prb: 1.0, n_prb_max: default_n_prb_max(), seed: 1 }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_prb.is_finite() && self.sigma_prb >= 0.0) {
            return Err(Error::InvalidConfig("traffic: sigma_prb must be >= 0".into()));
        }
        if !(self.mean_prb > 0.0 && self.mean_prb <= f64::from(self.n_prb_max)) {
            return Err(Error::InvalidConfig(format!(
                "traffic: mean_prb must be in (0, {}]",
                self.n_prb_max
            )));
        }
        Ok(())
    }
}

/// Draws one scheduled PRB count.
pub fn sample_prbs<R: Rng + ?Sized>(rng: &mut R, cfg: &TrafficConfig) -> u32 {
    // sigma = 0 still consumes a draw so streams stay aligned across loads.
    let z: f64 = StandardNormal.sample(rng);
    clamp_prbs(cfg.mean_prb + cfg.sigma_prb * z, cfg.n_prb_max)
}

fn clamp_prbs(x: f64, n_prb_max: u32) -> u32 {
    let max = f64::from(n_prb_max);
    if x.is_nan() {
        return n_prb_max;
    }
    x.round().clamp(1.0, max) as u32
}

/// Independent PRB generators, one per cell.
#[derive(Debug, Clone)]
pub struct PrbProcess {
    cfg: TrafficConfig,
    streams: Vec<ChaCha8Rng>,
}

impl PrbProcess {
    pub fn new(cfg: TrafficConfig, k_cells: usize) -> Result<Self> {
        cfg.validate()?;
        let streams = (0..k_cells).map(|k| cell_stream(cfg.seed, k)).collect();
        Ok(Self { cfg, streams })
    }

    pub fn config(&self) -> &TrafficConfig {
        &self.cfg
    }

    pub fn k_cells(&self) -> usize {
        self.streams.len()
    }

    /// PRB counts for every cell in the next slot.
    pub fn next_slot(&mut self) -> Vec<u32> {
        let cfg = &self.cfg;
        self.streams.iter_mut().map(|rng| sample_prbs(rng, cfg)).collect()
    }
}

/// The RNG stream of cell `k` under master seed `seed`.
pub fn cell_stream(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(CELL_STREAM_OFFSET + k as u64))
}
