//! Closed-loop beam tracking: the attacked trace next to the unattacked
//! baseline on the same ground-truth trajectory, with per-slot downlink
//! rates.

use std::fs;
use std::io::Write as _;

use mirage_attack::gen::gen_ground_truth;
use mirage_attack::track::{beam_track, Attacker, TrackSlot};
use mirage_core::traj::MotionPattern;

use crate::cmd::plan::load_policy;
use crate::error::{CliError, Result};
use crate::setup::{sub_seed, AttackerKind, Ctx};

pub const FILE: &str = "track.csv";

pub fn run(ctx: &Ctx, attacker: AttackerKind) -> Result<()> {
    let env = ctx.env()?;
    let road = &ctx.cfg.road;
    let traj = gen_ground_truth(
        MotionPattern::Straight,
        road.horizon,
        ctx.cfg.scenario.slot_s,
        road,
        &ctx.cfg.consistency,
        sub_seed(ctx.seed, "track-traj", 0),
    )?;
    let states = traj.states();

    let baseline = beam_track(&env, states, Attacker::None)?;
    let policy;
    let attacked = match attacker {
        AttackerKind::None => baseline.clone(),
        AttackerKind::Oracle => beam_track(&env, states, Attacker::Oracle)?,
        AttackerKind::Ppo => {
            policy = load_policy(ctx)?;
            beam_track(&env, states, Attacker::Policy(&policy))?
        }
    };
    if attacked.len() != baseline.len() {
        return Err(CliError::Numerical(format!(
            "attacked trace has {} slots, baseline {}",
            attacked.len(),
            baseline.len()
        )));
    }

    let mut out = String::new();
    out.push_str(
        "k,x,true_aod,aod_baseline,aod_attacked,rate_baseline,rate_attacked,action_hz,feasible\n",
    );
    for (b, a) in baseline.iter().zip(&attacked) {
        out.push_str(&row(states, b, a));
    }
    let mut f = fs::File::create(ctx.out.join(FILE))?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn row(states: &[mirage_core::geometry::VehicleState], b: &TrackSlot, a: &TrackSlot) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        b.k,
        states[b.k].x,
        b.true_aod,
        b.sensed_aod,
        a.sensed_aod,
        b.rate,
        a.rate,
        a.action.unwrap_or(0.0),
        a.feasible as u8
    )
}
