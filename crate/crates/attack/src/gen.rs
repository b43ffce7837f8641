//! Ground-truth vehicle motion: straight driving and sigmoid lane changes,
//! kinematically consistent slot-to-slot by construction.

use rand::Rng;

use mirage_core::config::{ConsistencyConfig, RoadConfig};
use mirage_core::geometry::VehicleState;
use mirage_core::rng::stream;
use mirage_core::traj::{MotionPattern, Trajectory};
use mirage_core::Real;

use crate::{AttackError, Result};

fn sigmoid(t: Real) -> Real {
    1.0 / (1.0 + (-t).exp())
}

/// Generate one trajectory of `k` slots of duration `t_slot`.
///
/// Start lane, speed, and lane-change onsets are drawn from `seed`; lateral
/// moves follow a sigmoid whose width keeps every per-slot step inside the
/// consistency budget, and speed jitter stays well under `a_max·t`.
pub fn gen_ground_truth(
    pattern: MotionPattern,
    k: usize,
    t_slot: Real,
    road: &RoadConfig,
    cons: &ConsistencyConfig,
    seed: u64,
) -> Result<Trajectory> {
    if k < 2 {
        return Err(AttackError::InvalidInput(format!("trajectory length {k} below 2")));
    }
    let mut rng = stream(seed, "ground-truth");
    let lane_idx = rng.gen_range(0..road.lanes_y.len());
    let y0 = road.lanes_y[lane_idx];
    let x0 = rng.gen_range(road.x_start.0..=road.x_start.1);
    let v0 = rng.gen_range(road.speed.0..=road.speed.1);

    // Adjacent-lane target; single changes go there, double changes return.
    let lane_step = if road.lanes_y.len() > 1 {
        let other = if lane_idx + 1 < road.lanes_y.len() { lane_idx + 1 } else { lane_idx - 1 };
        road.lanes_y[other] - y0
    } else {
        0.0
    };
    // Sigmoid width: peak slope is Δ/(4w) per slot; keep it at 80% of δy.
    let w_min = lane_step.abs() / (4.0 * 0.8 * cons.delta_y);
    let width = rng.gen_range(w_min.max(2.0)..w_min.max(2.0) + 1.5);
    let kf = k as Real;
    let onset1 = rng.gen_range(0.15 * kf..0.3 * kf);
    let onset2 = onset1 + rng.gen_range(0.3 * kf..0.4 * kf);

    let jitter = 0.4 * cons.a_max * t_slot;
    let mut states = Vec::with_capacity(k);
    let mut x = x0;
    let mut v = v0;
    for i in 0..k {
        let y = match pattern {
            MotionPattern::Straight => y0,
            MotionPattern::SingleLaneChange => {
                y0 + lane_step * sigmoid((i as Real - onset1) / width)
            }
            MotionPattern::DoubleLaneChange => {
                y0 + lane_step
                    * (sigmoid((i as Real - onset1) / width)
                        - sigmoid((i as Real - onset2) / width))
            }
        };
        states.push(VehicleState::new(x, y, v));
        x += v * t_slot;
        v = (v + rng.gen_range(-jitter..=jitter)).clamp(road.speed.0, road.speed.1);
    }
    Ok(states.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{clean_fraction, transition_ok};

    #[test]
    fn every_pattern_is_self_consistent() {
        let road = RoadConfig::defaults();
        let cons = ConsistencyConfig::defaults();
        for pattern in [
            MotionPattern::Straight,
            MotionPattern::SingleLaneChange,
            MotionPattern::DoubleLaneChange,
        ] {
            for seed in 0..20 {
                let traj =
                    gen_ground_truth(pattern, road.horizon, 10e-3, &road, &cons, seed).unwrap();
                assert_eq!(traj.len(), road.horizon);
                assert_eq!(clean_fraction(traj.states(), &cons, 10e-3), 1.0);
                for w in traj.states().windows(2) {
                    assert!(transition_ok(&w[0], &w[1], &cons, 10e-3));
                }
            }
        }
    }

    #[test]
    fn straight_never_moves_laterally() {
        let road = RoadConfig::defaults();
        let cons = ConsistencyConfig::defaults();
        let traj =
            gen_ground_truth(MotionPattern::Straight, 67, 10e-3, &road, &cons, 3).unwrap();
        let y0 = traj.states()[0].y;
        assert!(traj.states().iter().all(|s| s.y == y0));
    }

    #[test]
    fn lane_changes_reach_the_target_lane() {
        let road = RoadConfig::defaults();
        let cons = ConsistencyConfig::defaults();
        for seed in 0..10 {
            let traj = gen_ground_truth(
                MotionPattern::SingleLaneChange,
                67,
                10e-3,
                &road,
                &cons,
                seed,
            )
            .unwrap();
            let dy = (traj.states().last().unwrap().y - traj.states()[0].y).abs();
            assert!(dy > 2.0, "lateral move only {dy}");

            let traj = gen_ground_truth(
                MotionPattern::DoubleLaneChange,
                67,
                10e-3,
                &road,
                &cons,
                seed,
            )
            .unwrap();
            let states = traj.states();
            let span = states
                .iter()
                .map(|s| s.y)
                .fold((Real::INFINITY, Real::NEG_INFINITY), |(lo, hi), y| {
                    (lo.min(y), hi.max(y))
                });
            assert!(span.1 - span.0 > 2.0, "double change span {:?}", span);
            let dy_end = (states.last().unwrap().y - states[0].y).abs();
            assert!(dy_end < 1.0, "double change should return, ended {dy_end} away");
        }
    }

    #[test]
    fn too_short_rejected() {
        let road = RoadConfig::defaults();
        let cons = ConsistencyConfig::defaults();
        assert!(gen_ground_truth(MotionPattern::Straight, 1, 10e-3, &road, &cons, 0).is_err());
    }
}
