//! Single-slot spoofing experiment: angle-estimate bias induced by a spoof
//! tone under receiver noise, averaged over seeded trials. A `dmu_hz = 0`
//! row records the unspoofed baseline.

use std::fs;
use std::io::Write as _;

use mirage_core::echo::compensated_echo_general;
use mirage_core::geometry::{ris_geometry, vehicle_geometry, SlotGeometry, VehicleState};
use mirage_core::rng::indexed_stream;
use mirage_core::spoof::{aod_mle, state_estimate, MleGrid};
use mirage_core::Real;

use crate::error::{CliError, Result};
use crate::setup::Ctx;

pub const FILE: &str = "spoof_slot.csv";

pub struct SlotSweep {
    pub theta0_deg: Real,
    pub dmu_min: Real,
    pub dmu_max: Real,
    pub dmu_step: Real,
    pub trials: usize,
}

pub struct SlotRow {
    pub dmu: Real,
    pub mean_bias_deg: Real,
    pub mean_v_error: Real,
}

/// Mean angle bias and velocity error over noisy trials at one tone;
/// `dmu = None` leaves the RIS silent.
pub fn slot_bias(
    ctx: &Ctx,
    veh: &SlotGeometry,
    ris: &SlotGeometry,
    true_v: Real,
    theta0: Real,
    dmu: Option<Real>,
    trials: usize,
    stream_index: u64,
) -> Result<SlotRow> {
    let scn = &ctx.cfg.scenario;
    let mu_k = veh.doppler.expect("vehicle geometry always carries Doppler");
    let (spoof, mu_hat) = match dmu {
        Some(f) => (Some((ris, f)), f),
        None => (None, mu_k),
    };
    let mut bias = 0.0;
    let mut v_err = 0.0;
    for t in 0..trials {
        let mut rng =
            indexed_stream(ctx.seed, "slot-noise", stream_index * trials as u64 + t as u64);
        let echo = compensated_echo_general(scn, veh, spoof, theta0, mu_hat, Some(&mut rng))?;
        let theta_hat = aod_mle(&echo, scn, veh.gain, theta0, MleGrid::default())?;
        let sensed = state_estimate(veh.delay, mu_hat, theta_hat, scn)?;
        bias += theta_hat - veh.aod;
        v_err += sensed.v - true_v;
    }
    Ok(SlotRow {
        dmu: dmu.unwrap_or(0.0),
        mean_bias_deg: (bias / trials as Real).to_degrees(),
        mean_v_error: v_err / trials as Real,
    })
}

pub fn run(ctx: &Ctx, sweep: &SlotSweep) -> Result<()> {
    if sweep.trials == 0 || sweep.dmu_step <= 0.0 || sweep.dmu_max < sweep.dmu_min {
        return Err(CliError::Config("bad spoof-slot sweep".into()));
    }
    let scn = &ctx.cfg.scenario;
    let (x, y, v) = ctx.cfg.vehicle;
    let state = VehicleState::new(x, y, v);
    let veh = vehicle_geometry(&state, scn)?;
    let ris = ris_geometry(scn)?;
    let theta0 = sweep.theta0_deg.to_radians();

    let mut out = String::new();
    out.push_str("theta0_deg,dmu_hz,trials,mean_aod_bias_deg,mean_v_error\n");
    let baseline = slot_bias(ctx, &veh, &ris, v, theta0, None, sweep.trials, 0)?;
    out.push_str(&row(sweep, &baseline));
    let steps = ((sweep.dmu_max - sweep.dmu_min) / sweep.dmu_step).round() as usize;
    for i in 0..=steps {
        let dmu = sweep.dmu_min + i as Real * sweep.dmu_step;
        let r = slot_bias(ctx, &veh, &ris, v, theta0, Some(dmu), sweep.trials, i as u64 + 1)?;
        out.push_str(&row(sweep, &r));
    }
    let mut f = fs::File::create(ctx.out.join(FILE))?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn row(sweep: &SlotSweep, r: &SlotRow) -> String {
    format!(
        "{},{},{},{},{}\n",
        sweep.theta0_deg, r.dmu, sweep.trials, r.mean_bias_deg, r.mean_v_error
    )
}
