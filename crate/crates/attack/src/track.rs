//! Closed-loop beam tracking under attack and the downlink rate model.

use mirage_core::geometry::{vehicle_geometry, VehicleState};
use mirage_core::kernels::beam_coupling;
use mirage_core::Real;

use crate::env::SpoofEnv;
use crate::oracle::best_action;
use crate::policy::{masked_policy, PolicySpec};
use crate::{AttackError, Result};

/// Who drives the RIS during tracking.
pub enum Attacker<'a> {
    None,
    Oracle,
    Policy(&'a PolicySpec),
}

#[derive(Debug, Clone, Copy)]
pub struct TrackSlot {
    pub k: usize,
    pub theta0: Real,
    pub true_aod: Real,
    pub sensed_aod: Real,
    pub action: Option<Real>,
    pub feasible: bool,
    pub reward: Real,
    pub rate: Real,
}

/// Downlink rate toward the true vehicle with the beam at `theta0`:
/// `log₂(1 + P·γ²·|h(θ_k, θ₀)|²·|β_V|²/σ²)`.
pub fn achievable_rate(env: &SpoofEnv, theta0: Real, state: &VehicleState) -> Result<Real> {
    let scn = &env.scn;
    let veh = vehicle_geometry(state, scn)?;
    let misalign = beam_coupling(scn.n_tx, veh.aod, theta0).norm_sqr();
    let snr = scn.tx_power_w * scn.array_gain().powi(2) * misalign * veh.gain.norm_sqr()
        / scn.noise_power_w;
    Ok((1.0 + snr).log2())
}

/// Run the tracking loop over a true trajectory: each slot the RSU senses
/// (possibly under attack), updates its beam, and serves the vehicle at the
/// resulting rate.
pub fn beam_track(
    env: &SpoofEnv,
    states: &[VehicleState],
    attacker: Attacker<'_>,
) -> Result<Vec<TrackSlot>> {
    if states.len() < 2 {
        return Err(AttackError::InvalidInput("trajectory shorter than two slots".into()));
    }
    let mut xi = env.initial_state(&states[0], &states[1])?;
    let mut slots = Vec::with_capacity(states.len() - 1);
    for k in 1..states.len() {
        let next_true = states.get(k + 1);
        let (action, out) = match &attacker {
            Attacker::None => (None, env.step(&xi, None, next_true, None)?),
            Attacker::Oracle => {
                let (action, out, _) = best_action(env, &xi, states, k, 1)?;
                (action, out)
            }
            Attacker::Policy(spec) => {
                let mask = env.action_mask(&xi)?;
                if mask.iter().any(|&m| m) {
                    let fwd = spec.net.forward(&env.features(&xi));
                    let p = masked_policy(&fwd.out[..env.grid.len()], &mask, spec.alpha)?;
                    let a = p
                        .iter()
                        .enumerate()
                        .max_by(|x, y| x.1.total_cmp(y.1))
                        .map(|(i, _)| i)
                        .expect("nonempty action grid");
                    let freq = env.grid.freqs[a];
                    (Some(freq), env.step(&xi, Some(freq), next_true, None)?)
                } else {
                    (None, env.step(&xi, None, next_true, None)?)
                }
            }
        };
        let true_aod = vehicle_geometry(&states[k], &env.scn)?.aod;
        slots.push(TrackSlot {
            k,
            theta0: out.theta0,
            true_aod,
            sensed_aod: out.sensed.aod,
            action,
            feasible: out.feasible,
            reward: out.reward,
            rate: achievable_rate(env, out.theta0, &states[k])?,
        });
        match out.next {
            Some(n) => xi = n,
            None => break,
        }
    }
    Ok(slots)
}
