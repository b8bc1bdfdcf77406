use fhc_core::env::{
    apply_action, compute_reward, reference_policy, Delta, EnvAction, EnvSetup, EnvState,
    FronthaulEnv, RewardConfig,
};
use fhc_core::fronthaul::{CompressionSets, ConfigIndex, SystemConfig};
use fhc_core::oracle::max_cell_sum_util;
use proptest::prelude::*;

fn index_strategy() -> impl Strategy<Value = ConfigIndex> {
    (0usize..2, 0usize..7, 0usize..3).prop_map(|(q, b, r)| ConfigIndex { q, b, r })
}

proptest! {
    #[test]
    fn inverse_delta_restores_state(
        idx in proptest::collection::vec(index_strategy(), 3),
        cell in 0usize..3,
        d in 0usize..7,
    ) {
        let sets = CompressionSets::default();
        let mut state = EnvState::uniform(3, idx[0]);
        for (c, i) in state.cells.iter_mut().zip(&idx) {
            c.idx = *i;
        }
        let delta = Delta::from_index(d).unwrap();
        let moved = apply_action(&state, EnvAction { cell, delta }, &sets);
        let saturated = moved.cells[cell].idx == state.cells[cell].idx && delta != Delta::Noop;
        prop_assume!(!saturated);
        let back = apply_action(&moved, EnvAction { cell, delta: delta.inverse() }, &sets);
        prop_assert_eq!(back.cells[cell].idx, state.cells[cell].idx);
    }

    #[test]
    fn reward_bounds(utils in proptest::collection::vec(0.0f64..0.5, 3), lat in 0.0f64..400e-6) {
        let cfg = RewardConfig::default();
        let sys = SystemConfig::default();
        let max_util = max_cell_sum_util(&sys, &CompressionSets::default(), 273).unwrap();
        let scaled: Vec<f64> = utils.iter().map(|u| u * max_util / 1.5).collect();
        let r = compute_reward(&scaled, lat, &cfg);
        prop_assert!(r >= -cfg.lambda * cfg.d - 1e-12);
        prop_assert!(r <= max_util + cfg.lambda * (1.0 - cfg.d) + 1e-12);
    }
}

#[test]
fn reference_policy_never_exceeds_capacity() {
    let mut setup = EnvSetup::default();
    setup.traffic.mean_prb = 273.0;
    setup.traffic.sigma_prb = 20.0;
    let reference = reference_policy(&setup.sys, &setup.sets).unwrap();
    let mut env = FronthaulEnv::new(setup).unwrap();
    env.set_initial_config(&reference).unwrap();
    env.reset().unwrap();
    for _ in 0..100 {
        env.step_delta(Delta::Noop).unwrap();
        let records = env.last_interval();
        for slot in records.chunks(3) {
            let sum: f64 = slot.iter().map(|r| r.util).sum();
            assert!(sum <= 1.0, "{sum}");
        }
    }
}

#[test]
fn traces_are_reproducible() {
    let run = || {
        let mut env = FronthaulEnv::new(EnvSetup::default()).unwrap();
        (0..60)
            .map(|i| {
                let (_, r, info) = env.step_delta(Delta::from_index(i % 7).unwrap()).unwrap();
                (r.to_bits(), info.max_latency_s.to_bits(), info.configs)
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn staircase_moves_one_cell_per_step() {
    let mut env = FronthaulEnv::new(EnvSetup::default()).unwrap();
    let mut prev = env.configs();
    for _ in 0..30 {
        let (_, _, info) = env.step_delta(Delta::BUp).unwrap();
        let changed = prev.iter().zip(&info.configs).filter(|(a, b)| a != b).count();
        assert!(changed <= 1);
        prev = info.configs;
    }
}
