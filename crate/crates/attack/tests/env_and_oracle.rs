use approx::assert_abs_diff_eq;

use mirage_attack::consistency::{consistency_reward, consistency_vector};
use mirage_attack::env::{beam_predict, SpoofEnv};
use mirage_attack::gen::gen_ground_truth;
use mirage_attack::grid::ActionGrid;
use mirage_attack::oracle::oracle_plan;
use mirage_core::config::{ConsistencyConfig, RoadConfig, Scenario};
use mirage_core::geometry::VehicleState;
use mirage_core::spoof::SensedState;
use mirage_core::traj::MotionPattern;
use mirage_core::Real;

fn sensed(x: Real, y: Real, v: Real, aod: Real) -> SensedState {
    SensedState { x, y, v, aod, doppler: 0.0, delay: 0.0 }
}

fn small_env(l: usize) -> SpoofEnv {
    let scn = Scenario::defaults();
    let grid = ActionGrid::new(l, scn.phase_interval_s).unwrap();
    SpoofEnv::new(scn, ConsistencyConfig::defaults(), grid).unwrap()
}

#[test]
fn stationary_target_keeps_the_beam() {
    let s = sensed(3.0, 21.0, 0.0, 1.2);
    assert_eq!(beam_predict(&s, 10e-3).unwrap(), 1.2);
}

#[test]
fn beam_shift_matches_the_geometry() {
    let aod = 81.9f64.to_radians();
    let s = sensed(3.0, 21.0, 10.0, aod);
    let theta0 = beam_predict(&s, 10e-3).unwrap();
    assert_abs_diff_eq!((theta0 - aod).to_degrees(), -0.267, epsilon = 0.002);

    // Broadside: the shift is exactly −v̂T/d.
    let d = 3.0f64.hypot(21.0);
    let b = sensed(3.0, 21.0, 10.0, std::f64::consts::FRAC_PI_2);
    let shift = beam_predict(&b, 10e-3).unwrap() - std::f64::consts::FRAC_PI_2;
    assert_abs_diff_eq!(shift, -10.0 * 10e-3 / d, epsilon = 1e-15);

    assert!(beam_predict(&sensed(0.0, 0.0, 1.0, 1.0), 10e-3).is_err());
}

#[test]
fn off_grid_action_rejected() {
    let env = small_env(50);
    let s0 = VehicleState::new(3.0, 21.0, 10.0);
    let s1 = VehicleState::new(3.1, 21.0, 10.0);
    let xi = env.initial_state(&s0, &s1).unwrap();
    assert!(env.step(&xi, Some(17.3), None, None).is_err());
    assert!(env.step(&xi, Some(20.0), None, None).is_ok());
}

#[test]
fn infeasible_tone_leaves_doppler_unspoofed() {
    // A near-invisible RIS cannot beat the true peak anywhere.
    let mut scn = Scenario::defaults();
    scn.ris_area_m2 = 1e-4;
    let grid = ActionGrid::new(20, scn.phase_interval_s).unwrap();
    let env = SpoofEnv::new(scn, ConsistencyConfig::defaults(), grid).unwrap();
    let s0 = VehicleState::new(3.0, 21.0, 10.0);
    let s1 = VehicleState::new(3.1, 21.0, 10.0);
    let xi = env.initial_state(&s0, &s1).unwrap();

    let mask = env.action_mask(&xi).unwrap();
    assert!(mask.iter().all(|&m| !m));

    let out = env.step(&xi, Some(env.grid.freqs[10]), None, None).unwrap();
    assert!(!out.feasible);
    let mu_true = mirage_core::geometry::vehicle_geometry(&s1, &env.scn)
        .unwrap()
        .doppler
        .unwrap();
    assert_abs_diff_eq!(out.sensed.doppler, mu_true, epsilon = 1e-9);
}

#[test]
fn reward_is_a_replay_of_the_logged_pair() {
    let env = small_env(50);
    let road = RoadConfig::defaults();
    let cons = ConsistencyConfig::defaults();
    let traj =
        gen_ground_truth(MotionPattern::Straight, 8, env.scn.slot_s, &road, &cons, 11).unwrap();
    let plan = oracle_plan(&env, traj.states(), 1).unwrap();
    assert_eq!(plan.slots.len(), 7);

    let mut prev = env.initial_state(&traj.states()[0], &traj.states()[1]).unwrap().prev_sensed;
    for slot in &plan.slots {
        let c = consistency_vector(&prev, &slot.sensed, &cons, env.scn.slot_s);
        assert_eq!(consistency_reward(&c), slot.reward);
        prev = slot.sensed;
    }
    assert!(plan.slots.iter().all(|s| s.reward <= 0.0));
}

#[test]
fn oracle_with_empty_mask_records_silence() {
    let mut scn = Scenario::defaults();
    scn.ris_area_m2 = 1e-4;
    let grid = ActionGrid::new(20, scn.phase_interval_s).unwrap();
    let env = SpoofEnv::new(scn, ConsistencyConfig::defaults(), grid).unwrap();
    let states = [
        VehicleState::new(3.0, 21.0, 10.0),
        VehicleState::new(3.1, 21.0, 10.0),
        VehicleState::new(3.2, 21.0, 10.0),
    ];
    let plan = oracle_plan(&env, &states, 1).unwrap();
    assert!(plan.slots.iter().all(|s| s.action.is_none()));
    // Silent sensing of exact motion stays consistent up to the angle
    // search resolution.
    assert!(plan.total_reward > -0.05, "total {}", plan.total_reward);
}

#[test]
fn oracle_dominates_any_fixed_action_on_one_slot() {
    let env = small_env(50);
    let states = [VehicleState::new(3.0, 21.0, 10.0), VehicleState::new(3.1, 21.0, 10.0)];
    let plan = oracle_plan(&env, &states, 1).unwrap();
    let xi = env.initial_state(&states[0], &states[1]).unwrap();
    let mask = env.action_mask(&xi).unwrap();
    for (i, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let out = env.step(&xi, Some(env.grid.freqs[i]), None, None).unwrap();
        assert!(plan.total_reward >= out.reward - 1e-12);
    }
}

#[test]
fn lookahead_never_hurts_total_reward() {
    let env = small_env(25);
    let road = RoadConfig::defaults();
    let cons = ConsistencyConfig::defaults();
    let traj =
        gen_ground_truth(MotionPattern::Straight, 4, env.scn.slot_s, &road, &cons, 5).unwrap();
    let greedy = oracle_plan(&env, traj.states(), 1).unwrap();
    let deeper = oracle_plan(&env, traj.states(), 2).unwrap();
    assert!(deeper.total_reward >= greedy.total_reward - 1e-9);
}
