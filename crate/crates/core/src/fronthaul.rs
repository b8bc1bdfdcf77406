//! Fronthaul load model.
//!
//! Per-cell downlink fronthaul traffic is the modulated data payload plus the
//! precoding weights for every scheduled PRB group. Bit counts are exact
//! integers; rates and utilizations are `f64`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static system parameters shared by all cells on the fronthaul link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub bandwidth_hz: f64,
    pub scs_index_mu: u32,
    pub n_prb_max: u32,
    pub n_re_per_prb_slot: u32,
    pub n_ant: u32,
    pub n_layers: u32,
    pub t_slot_s: f64,
    /// Only the latency model's pacing uses this; the slot duration is taken
    /// as given rather than derived from 14 symbols.
    pub t_symb_s: f64,
    pub c_fh_bps: f64,
    pub k_cells: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 100e6,
            scs_index_mu: 1,
            n_prb_max: 273,
            n_re_per_prb_slot: 168,
            n_ant: 64,
            n_layers: 12,
            t_slot_s: 5e-4,
            t_symb_s: 33.33e-6,
            c_fh_bps: 25e9,
            k_cells: 3,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("system: {msg}")));
        if self.scs_index_mu > 4 {
            return bad("scs_index_mu must be in 0..=4");
        }
        if self.n_re_per_prb_slot != 12 * 14 {
            return bad("n_re_per_prb_slot must be 12 x 14 = 168");
        }
        if self.n_prb_max == 0 || self.n_ant == 0 || self.n_layers == 0 || self.k_cells == 0 {
            return bad("counts must be strictly positive");
        }
        if self.n_layers > self.n_ant {
            return bad("n_layers must not exceed n_ant");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.bandwidth_hz)
            && positive(self.t_slot_s)
            && positive(self.t_symb_s)
            && positive(self.c_fh_bps))
        {
            return bad("durations, bandwidth and capacity must be strictly positive");
        }
        Ok(())
    }
}

/// A finite, strictly increasing set of admissible parameter values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ParamSet(Vec<u32>);

impl ParamSet {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("parameter sets must be non-empty".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "parameter set {values:?} is not strictly increasing"
            )));
        }
        if values[0] == 0 {
            return Err(Error::InvalidConfig("parameter values must be positive".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<u32> {
        self.0.get(idx).copied()
    }

    pub fn index_of(&self, value: u32) -> Option<usize> {
        self.0.binary_search(&value).ok()
    }

    pub fn contains(&self, value: u32) -> bool {
        self.index_of(value).is_some()
    }

    pub fn last_index(&self) -> usize {
        self.0.len() - 1
    }
}

impl TryFrom<Vec<u32>> for ParamSet {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ParamSet> for Vec<u32> {
    fn from(set: ParamSet) -> Self {
        set.0
    }
}

/// Admissible values for each compression knob.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompressionSets {
    /// Modulation orders (bits per symbol).
    pub q_set: ParamSet,
    /// Precoder weight bitwidths.
    pub b_w_set: ParamSet,
    /// Precoder granularities (PRBs sharing one weight).
    pub r_w_set: ParamSet,
}

impl Default for CompressionSets {
    fn default() -> Self {
        Self {
            q_set: ParamSet(vec![6, 8]),
            b_w_set: ParamSet((16..=22).collect()),
            r_w_set: ParamSet(vec![1, 2, 4]),
        }
    }
}

impl CompressionSets {
    /// Number of distinct per-cell configurations.
    pub fn n_configs(&self) -> usize {
        self.q_set.len() * self.b_w_set.len() * self.r_w_set.len()
    }

    /// Every configuration, in (q, b_w, r_w) lexicographic order.
    pub fn all_configs(&self) -> Vec<CompressionConfig> {
        let mut out = Vec::with_capacity(self.n_configs());
        for &q in self.q_set.values() {
            for &b_w in self.b_w_set.values() {
                for &r_w in self.r_w_set.values() {
                    out.push(CompressionConfig { q, b_w, r_w });
                }
            }
        }
        out
    }

    pub fn check(&self, cfg: &CompressionConfig) -> Result<()> {
        if !self.q_set.contains(cfg.q) {
            return Err(Error::NotInSet { param: "q", value: cfg.q });
        }
        if !self.b_w_set.contains(cfg.b_w) {
            return Err(Error::NotInSet { param: "b_w", value: cfg.b_w });
        }
        if !self.r_w_set.contains(cfg.r_w) {
            return Err(Error::NotInSet { param: "r_w", value: cfg.r_w });
        }
        Ok(())
    }

    pub fn resolve(&self, idx: ConfigIndex) -> CompressionConfig {
        CompressionConfig {
            q: self.q_set.values()[idx.q],
            b_w: self.b_w_set.values()[idx.b],
            r_w: self.r_w_set.values()[idx.r],
        }
    }

    pub fn index_of(&self, cfg: &CompressionConfig) -> Result<ConfigIndex> {
        self.check(cfg)?;
        Ok(ConfigIndex {
            q: self.q_set.index_of(cfg.q).unwrap_or_default(),
            b: self.b_w_set.index_of(cfg.b_w).unwrap_or_default(),
            r: self.r_w_set.index_of(cfg.r_w).unwrap_or_default(),
        })
    }

    /// Lowest modulation order, fewest weight bits, coarsest granularity.
    pub fn max_compression(&self) -> ConfigIndex {
        ConfigIndex { q: 0, b: 0, r: self.r_w_set.last_index() }
    }
}

/// Per-cell compression configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompressionConfig {
    pub q: u32,
    pub b_w: u32,
    pub r_w: u32,
}

impl std::fmt::Display for CompressionConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(q={}, b_w={}, r_w={})", self.q, self.b_w, self.r_w)
    }
}

/// Position of a configuration within the ordered sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ConfigIndex {
    pub q: usize,
    pub b: usize,
    pub r: usize,
}

/// Load and latency of one cell in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub t: u64,
    pub k: usize,
    pub n_prb: u32,
    pub config: CompressionConfig,
    pub payload_bits: u64,
    pub weight_bits: u64,
    pub rate_bps: f64,
    pub util: f64,
    pub latency_s: f64,
}

impl SlotRecord {
    pub fn total_bits(&self) -> u64 {
        self.payload_bits + self.weight_bits
    }
}

/// Data payload bits for one cell in one slot.
pub fn payload_bits(sys: &SystemConfig, sets: &CompressionSets, n_prb: u32, q: u32) -> Result<u64> {
    if n_prb > sys.n_prb_max {
        return Err(Error::PrbOutOfRange { n_prb, max: sys.n_prb_max });
    }
    if !sets.q_set.contains(q) {
        return Err(Error::NotInSet { param: "q", value: q });
    }
    Ok(u64::from(sys.n_re_per_prb_slot) * u64::from(sys.n_layers) * u64::from(n_prb) * u64::from(q))
}

/// Precoding weight bits for one cell in one slot: one weight per layer and
/// antenna for every group of `r_w` consecutive PRBs.
pub fn weight_bits(
    sys: &SystemConfig,
    sets: &CompressionSets,
    n_prb: u32,
    r_w: u32,
    b_w: u32,
) -> Result<u64> {
    if r_w == 0 {
        return Err(Error::InvalidConfig("precoder granularity must be positive".into()));
    }
    if !sets.r_w_set.contains(r_w) {
        return Err(Error::NotInSet { param: "r_w", value: r_w });
    }
    if !sets.b_w_set.contains(b_w) {
        return Err(Error::NotInSet { param: "b_w", value: b_w });
    }
    let groups = u64::from(n_prb.div_ceil(r_w));
    Ok(groups * u64::from(sys.n_layers) * u64::from(sys.n_ant) * u64::from(b_w))
}

/// Payload and weight bits of one cell in one slot.
pub fn cell_bits(
    sys: &SystemConfig,
    sets: &CompressionSets,
    n_prb: u32,
    cfg: &CompressionConfig,
) -> Result<(u64, u64)> {
    let payload = payload_bits(sys, sets, n_prb, cfg.q)?;
    let weights = weight_bits(sys, sets, n_prb, cfg.r_w, cfg.b_w)?;
    Ok((payload, weights))
}

/// Fronthaul rate (bit/s) of one cell in one slot.
pub fn fh_rate(
    sys: &SystemConfig,
    sets: &CompressionSets,
    n_prb: u32,
    cfg: &CompressionConfig,
) -> Result<f64> {
    let (payload, weights) = cell_bits(sys, sets, n_prb, cfg)?;
    Ok((payload + weights) as f64 / sys.t_slot_s)
}

pub fn slot_utilization(rate_bps: f64, c_fh_bps: f64) -> Result<f64> {
    if !(c_fh_bps > 0.0) {
        return Err(Error::ZeroCapacity);
    }
    Ok(rate_bps / c_fh_bps)
}

/// Mean over slots of the per-slot sum of cell utilizations. The cell sum is
/// not divided by the number of cells.
pub fn average_utilization(records: &[SlotRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::IncompleteGrid("no records".into()));
    }
    let slots: BTreeSet<u64> = records.iter().map(|r| r.t).collect();
    let cells: BTreeSet<usize> = records.iter().map(|r| r.k).collect();
    let cells_seen: BTreeSet<(u64, usize)> = records.iter().map(|r| (r.t, r.k)).collect();
    if cells_seen.len() != records.len() {
        return Err(Error::IncompleteGrid("duplicate (slot, cell) entries".into()));
    }
    if cells_seen.len() != slots.len() * cells.len() {
        return Err(Error::IncompleteGrid(format!(
            "{} records for {} slots x {} cells",
            records.len(),
            slots.len(),
            cells.len()
        )));
    }
    let total: f64 = records.iter().map(|r| r.util).sum();
    Ok(total / slots.len() as f64)
}

/// Size of the joint per-cell configuration space, `(|Q|·|B|·|R|)^K`.
pub fn action_space_cardinality(q_len: usize, b_len: usize, r_len: usize, k_cells: u32) -> u128 {
    ((q_len * b_len * r_len) as u128).pow(k_cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (SystemConfig, CompressionSets) {
        (SystemConfig::default(), CompressionSets::default())
    }

    fn cfg(q: u32, b_w: u32, r_w: u32) -> CompressionConfig {
        CompressionConfig { q, b_w, r_w }
    }

    #[test]
    fn payload_examples() {
        let (sys, sets) = defaults();
        assert_eq!(payload_bits(&sys, &sets, 273, 6).unwrap(), 3_302_208);
        assert_eq!(payload_bits(&sys, &sets, 273, 8).unwrap(), 4_402_944);
        assert_eq!(payload_bits(&sys, &sets, 0, 6).unwrap(), 0);
    }

    #[test]
    fn payload_rejects_bad_inputs() {
        let (sys, sets) = defaults();
        assert!(matches!(
            payload_bits(&sys, &sets, 274, 6),
            Err(Error::PrbOutOfRange { n_prb: 274, max: 273 })
        ));
        assert!(matches!(payload_bits(&sys, &sets, 10, 4), Err(Error::NotInSet { param: "q", .. })));
    }

    #[test]
    fn weight_examples() {
        let (sys, sets) = defaults();
        assert_eq!(weight_bits(&sys, &sets, 273, 4, 16).unwrap(), 847_872);
        assert_eq!(weight_bits(&sys, &sets, 273, 1, 22).unwrap(), 4_612_608);
        assert_eq!(weight_bits(&sys, &sets, 0, 4, 16).unwrap(), 0);
        assert!(weight_bits(&sys, &sets, 10, 0, 16).is_err());
    }

    #[test]
    fn rate_examples() {
        let (sys, sets) = defaults();
        let r = fh_rate(&sys, &sets, 273, &cfg(6, 16, 4)).unwrap();
        assert!((r - 8.30016e9).abs() / 8.30016e9 < 1e-12);
        let r = fh_rate(&sys, &sets, 273, &cfg(8, 16, 4)).unwrap();
        assert!((r - 10.501632e9).abs() / 10.501632e9 < 1e-12);
        assert_eq!(fh_rate(&sys, &sets, 0, &cfg(8, 22, 1)).unwrap(), 0.0);
    }

    #[test]
    fn utilization_examples() {
        assert!((slot_utilization(8.30016e9, 25e9).unwrap() - 0.3320064).abs() < 1e-15);
        assert_eq!(slot_utilization(25e9, 25e9).unwrap(), 1.0);
        assert_eq!(slot_utilization(0.0, 25e9).unwrap(), 0.0);
        assert!(matches!(slot_utilization(1.0, 0.0), Err(Error::ZeroCapacity)));
    }

    fn rec(t: u64, k: usize, util: f64) -> SlotRecord {
        SlotRecord {
            t,
            k,
            n_prb: 0,
            config: cfg(6, 16, 4),
            payload_bits: 0,
            weight_bits: 0,
            rate_bps: 0.0,
            util,
            latency_s: 0.0,
        }
    }

    #[test]
    fn average_utilization_sums_cells() {
        let one_slot: Vec<_> = (0..3).map(|k| rec(0, k, 0.332)).collect();
        assert!((average_utilization(&one_slot).unwrap() - 0.996).abs() < 1e-12);

        let zeros: Vec<_> = (0..3).map(|k| rec(0, k, 0.0)).collect();
        assert_eq!(average_utilization(&zeros).unwrap(), 0.0);

        let two = vec![rec(0, 0, 0.1), rec(0, 1, 0.3), rec(1, 0, 0.2), rec(1, 1, 0.4)];
        assert!((average_utilization(&two).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn average_utilization_rejects_holes() {
        let holes = vec![rec(0, 0, 0.1), rec(0, 1, 0.3), rec(1, 0, 0.2)];
        assert!(matches!(average_utilization(&holes), Err(Error::IncompleteGrid(_))));
        let dup = vec![rec(0, 0, 0.1), rec(0, 0, 0.1)];
        assert!(average_utilization(&dup).is_err());
        assert!(average_utilization(&[]).is_err());
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(action_space_cardinality(2, 7, 3, 3), 74_088);
        assert_eq!(action_space_cardinality(2, 7, 3, 1), 42);
        assert_eq!(action_space_cardinality(1, 1, 1, 5), 1);
    }

    #[test]
    fn ceiling_buckets_share_weight_bits() {
        let (sys, sets) = defaults();
        for &r_w in sets.r_w_set.values() {
            for m in 1..=(sys.n_prb_max / r_w) {
                let hi = weight_bits(&sys, &sets, r_w * m, r_w, 18).unwrap();
                let lo = weight_bits(&sys, &sets, r_w * m - r_w + 1, r_w, 18).unwrap();
                assert_eq!(hi, lo, "r_w={r_w} m={m}");
            }
        }
    }

    #[test]
    fn param_set_validation() {
        assert!(ParamSet::new(vec![]).is_err());
        assert!(ParamSet::new(vec![2, 2]).is_err());
        assert!(ParamSet::new(vec![4, 2]).is_err());
        assert!(ParamSet::new(vec![0, 2]).is_err());
        let set = ParamSet::new(vec![1, 2, 4]).unwrap();
        assert_eq!(set.index_of(4), Some(2));
        assert_eq!(set.index_of(3), None);
    }

    #[test]
    fn system_validation() {
        let mut sys = SystemConfig::default();
        assert!(sys.validate().is_ok());
        sys.n_layers = 65;
        assert!(sys.validate().is_err());
        let mut sys = SystemConfig::default();
        sys.n_re_per_prb_slot = 144;
        assert!(sys.validate().is_err());
        let mut sys = SystemConfig::default();
        sys.c_fh_bps = 0.0;
        assert!(sys.validate().is_err());
    }

    #[test]
    fn index_round_trip() {
        let sets = CompressionSets::default();
        for c in sets.all_configs() {
            assert_eq!(sets.resolve(sets.index_of(&c).unwrap()), c);
        }
        assert_eq!(sets.resolve(sets.max_compression()), cfg(6, 16, 4));
    }
}
