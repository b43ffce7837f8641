//! Brute-force spoofing planner: per slot, score every feasible tone
//! through the full sensing chain and keep the best.

use mirage_core::geometry::VehicleState;
use mirage_core::spoof::SensedState;
use mirage_core::Real;

use crate::env::{MdpState, SpoofEnv, StepOutcome};
use crate::{AttackError, Result};

#[derive(Debug, Clone, Copy)]
pub struct PlanSlot {
    pub k: usize,
    pub theta0: Real,
    pub action: Option<Real>,
    pub feasible: bool,
    pub reward: Real,
    pub sensed: SensedState,
}

#[derive(Debug, Clone)]
pub struct SpoofPlan {
    pub slots: Vec<PlanSlot>,
    pub total_reward: Real,
}

/// Best achievable reward from `xi` over the next `h` slots (noiseless),
/// together with the first action achieving it. Ties break toward the
/// lowest frequency; an empty mask yields a silent slot.
pub(crate) fn best_action(
    env: &SpoofEnv,
    xi: &MdpState,
    states: &[VehicleState],
    k: usize,
    h: usize,
) -> Result<(Option<Real>, StepOutcome, Real)> {
    let mask = env.action_mask(xi)?;
    let next_true = states.get(k + 1);
    if !mask.iter().any(|&m| m) {
        let out = env.step(xi, None, next_true, None)?;
        let future = lookahead(env, &out, states, k, h)?;
        let total = out.reward + future;
        return Ok((None, out, total));
    }
    let mut best: Option<(Option<Real>, StepOutcome, Real)> = None;
    for (i, &feasible) in mask.iter().enumerate() {
        if !feasible {
            continue;
        }
        let freq = env.grid.freqs[i];
        let out = env.step(xi, Some(freq), next_true, None)?;
        let total = out.reward + lookahead(env, &out, states, k, h)?;
        // Strict improvement only: ascending iteration keeps the lowest
        // frequency on ties.
        if best.as_ref().map_or(true, |(_, _, b)| total > *b) {
            best = Some((Some(freq), out, total));
        }
    }
    best.ok_or_else(|| AttackError::InvalidInput("empty action grid".into()))
}

fn lookahead(
    env: &SpoofEnv,
    out: &StepOutcome,
    states: &[VehicleState],
    k: usize,
    h: usize,
) -> Result<Real> {
    if h <= 1 {
        return Ok(0.0);
    }
    match (&out.next, states.get(k + 1)) {
        (Some(next), Some(_)) => {
            let (_, _, total) = best_action(env, next, states, k + 1, h - 1)?;
            Ok(total)
        }
        _ => Ok(0.0),
    }
}

/// Plan a whole trajectory slot by slot with an `h`-step lookahead
/// (`h = 1` is greedy).
pub fn oracle_plan(env: &SpoofEnv, states: &[VehicleState], h: usize) -> Result<SpoofPlan> {
    if h < 1 {
        return Err(AttackError::InvalidInput("lookahead must be at least 1".into()));
    }
    if states.len() < 2 {
        return Err(AttackError::InvalidInput("trajectory shorter than two slots".into()));
    }
    let mut xi = env.initial_state(&states[0], &states[1])?;
    let mut slots = Vec::with_capacity(states.len() - 1);
    let mut total = 0.0;
    for k in 1..states.len() {
        let (action, out, _) = best_action(env, &xi, states, k, h)?;
        slots.push(PlanSlot {
            k,
            theta0: out.theta0,
            action,
            feasible: out.feasible,
            reward: out.reward,
            sensed: out.sensed,
        });
        total += out.reward;
        match out.next {
            Some(next) => xi = next,
            None => break,
        }
    }
    Ok(SpoofPlan { slots, total_reward: total })
}
