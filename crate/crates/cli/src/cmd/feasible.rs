//! Feasible-set sweep: for a range of beam directions, which spoof tones
//! overpower the true Doppler peak, and what velocity each one fakes.

use std::fs;
use std::io::Write as _;

use mirage_core::geometry::{ris_geometry, vehicle_geometry, VehicleState};
use mirage_core::mf::default_grid;
use mirage_core::spoof::{feasible_set, state_estimate};
use mirage_core::Real;

use crate::error::{CliError, Result};
use crate::setup::Ctx;

pub const FILE: &str = "feasible_set.csv";

/// One sweep row per (beam direction, grid tone).
pub fn run(ctx: &Ctx, min_deg: Real, max_deg: Real, step_deg: Real) -> Result<()> {
    if !(step_deg > 0.0 && max_deg >= min_deg) {
        return Err(CliError::Config(format!(
            "bad sweep range {min_deg}..{max_deg} step {step_deg}"
        )));
    }
    let scn = &ctx.cfg.scenario;
    let (x, y, v) = ctx.cfg.vehicle;
    let veh = vehicle_geometry(&VehicleState::new(x, y, v), scn)?;
    let ris = ris_geometry(scn)?;
    let grid = default_grid(scn);

    let mut out = String::new();
    out.push_str("theta0_deg,freq_hz,feasible,lhs,v_sensed,v_error\n");
    let steps = ((max_deg - min_deg) / step_deg).round() as usize;
    for i in 0..=steps {
        let theta0_deg = min_deg + i as Real * step_deg;
        let fs = feasible_set(scn, &veh, &ris, theta0_deg.to_radians(), &grid)?;
        for (j, &feasible) in fs.mask.iter().enumerate() {
            let dmu = grid[j];
            // Velocity the RSU would report if this tone captured the Doppler
            // estimate while the angle stayed true.
            let sensed = state_estimate(veh.delay, dmu, veh.aod, scn)?;
            out.push_str(&format!(
                "{theta0_deg},{dmu},{},{},{},{}\n",
                feasible as u8,
                fs.lhs_values[j],
                sensed.v,
                sensed.v - v
            ));
        }
    }
    let mut f = fs::File::create(ctx.out.join(FILE))?;
    f.write_all(out.as_bytes())?;
    Ok(())
}
