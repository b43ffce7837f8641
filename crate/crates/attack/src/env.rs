//! The per-slot spoofing decision process: beam prediction, physical
//! sensing under an injected tone, and the consistency reward.

use rand_chacha::ChaCha8Rng;

use mirage_core::config::{ConsistencyConfig, Scenario};
use mirage_core::echo::compensated_echo_general;
use mirage_core::geometry::{ris_geometry, vehicle_geometry, SlotGeometry, VehicleState};
use mirage_core::spoof::{aod_mle, feasible_set, state_estimate, MleGrid, SensedState};
use mirage_core::Real;

use crate::consistency::{consistency_reward, consistency_vector};
use crate::grid::ActionGrid;
use crate::{AttackError, Result};

/// Everything the attacker (and the policy) sees at slot k: the RSU's last
/// sensed state and the true state about to be sensed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdpState {
    pub prev_sensed: SensedState,
    pub true_state: VehicleState,
}

/// One sensing slot resolved: the beam used, whether the tone was feasible,
/// what the RSU sensed, and the consistency reward earned.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub theta0: Real,
    pub feasible: bool,
    pub sensed: SensedState,
    pub reward: Real,
    pub next: Option<MdpState>,
}

/// Next-slot beam direction extrapolated from the last sensed state:
/// `θ₀ = θ̂ − v̂·sinθ̂·T/‖(x̂,ŷ)‖`.
pub fn beam_predict(prev: &SensedState, t_slot: Real) -> Result<Real> {
    let d = prev.x.hypot(prev.y);
    if d < 1e-9 {
        return Err(AttackError::InvalidInput("sensed position at the array origin".into()));
    }
    Ok(prev.aod - prev.v * prev.aod.sin() * t_slot / d)
}

pub struct SpoofEnv {
    pub scn: Scenario,
    pub cons: ConsistencyConfig,
    pub grid: ActionGrid,
    ris: SlotGeometry,
    mle: MleGrid,
}

impl SpoofEnv {
    pub fn new(scn: Scenario, cons: ConsistencyConfig, grid: ActionGrid) -> Result<Self> {
        let ris = ris_geometry(&scn)?;
        // Coarser angle search than the single-slot experiments: the planner
        // calls the MLE once per candidate action.
        let mle = MleGrid { step_deg: 0.5, refine_deg: 0.02 };
        Ok(SpoofEnv { scn, cons, grid, ris, mle })
    }

    pub fn with_mle(mut self, mle: MleGrid) -> Self {
        self.mle = mle;
        self
    }

    pub fn ris(&self) -> &SlotGeometry {
        &self.ris
    }

    /// Episodes start from an accurate initial sensing of `s0`; the first
    /// decision concerns the sensing of `s1`.
    pub fn initial_state(&self, s0: &VehicleState, s1: &VehicleState) -> Result<MdpState> {
        let g = vehicle_geometry(s0, &self.scn)?;
        let prev_sensed = SensedState {
            x: s0.x,
            y: s0.y,
            v: s0.v,
            aod: g.aod,
            doppler: g.doppler.expect("vehicle geometry always carries Doppler"),
            delay: g.delay,
        };
        Ok(MdpState { prev_sensed, true_state: *s1 })
    }

    /// Per-action feasibility of the whole grid at the current beam.
    pub fn action_mask(&self, xi: &MdpState) -> Result<Vec<bool>> {
        let theta0 = beam_predict(&xi.prev_sensed, self.scn.slot_s)?;
        let veh = vehicle_geometry(&xi.true_state, &self.scn)?;
        Ok(feasible_set(&self.scn, &veh, &self.ris, theta0, &self.grid.freqs)?.mask)
    }

    /// Resolve one slot. `action = None` keeps the RIS silent; an off-grid
    /// frequency is rejected. An infeasible tone leaves the Doppler reading
    /// at the true value while still perturbing the angle estimate.
    pub fn step(
        &self,
        xi: &MdpState,
        action: Option<Real>,
        next_true: Option<&VehicleState>,
        mut noise: Option<&mut ChaCha8Rng>,
    ) -> Result<StepOutcome> {
        let theta0 = beam_predict(&xi.prev_sensed, self.scn.slot_s)?;
        let veh = vehicle_geometry(&xi.true_state, &self.scn)?;
        let mu_k = veh.doppler.expect("vehicle geometry always carries Doppler");

        let (spoof, feasible) = match action {
            None => (None, false),
            Some(dmu) => {
                if self.grid.index_of(dmu).is_none() {
                    return Err(AttackError::InvalidInput(format!(
                        "action {dmu} Hz off the {}-point grid",
                        self.grid.len()
                    )));
                }
                let fs = feasible_set(&self.scn, &veh, &self.ris, theta0, &[dmu])?;
                (Some((&self.ris, dmu)), fs.mask[0])
            }
        };
        let mu_hat = match (action, feasible) {
            (Some(dmu), true) => dmu,
            _ => mu_k,
        };
        let echo = compensated_echo_general(
            &self.scn,
            &veh,
            spoof,
            theta0,
            mu_hat,
            noise.as_deref_mut(),
        )?;
        let theta_hat = aod_mle(&echo, &self.scn, veh.gain, theta0, self.mle)?;
        let sensed = state_estimate(veh.delay, mu_hat, theta_hat, &self.scn)?;
        let reward = consistency_reward(&consistency_vector(
            &xi.prev_sensed,
            &sensed,
            &self.cons,
            self.scn.slot_s,
        ));
        let next = next_true.map(|s| MdpState { prev_sensed: sensed, true_state: *s });
        Ok(StepOutcome { theta0, feasible, sensed, reward, next })
    }

    /// Policy features: both states normalized per-coordinate to [−1, 1].
    pub fn features(&self, xi: &MdpState) -> [Real; 6] {
        let norm = |v: Real, lo: Real, hi: Real| ((v - lo) / (hi - lo) * 2.0 - 1.0).clamp(-1.0, 1.0);
        let p = &xi.prev_sensed;
        let t = &xi.true_state;
        [
            norm(p.x, 0.0, 25.0),
            norm(p.y, 10.0, 30.0),
            norm(p.v, -40.0, 90.0),
            norm(t.x, 0.0, 25.0),
            norm(t.y, 10.0, 30.0),
            norm(t.v, -40.0, 90.0),
        ]
    }
}
