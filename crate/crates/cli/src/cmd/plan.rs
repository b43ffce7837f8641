//! Attack planning: exhaustive per-slot oracle plans, or policy-gradient
//! training that persists the learned policy for later tracking runs.

use std::fs;
use std::io::Write as _;

use mirage_attack::gen::gen_ground_truth;
use mirage_attack::oracle::oracle_plan;
use mirage_attack::policy::PolicySpec;
use mirage_attack::ppo::{ppo_train, PpoHyper};
use mirage_core::traj::MotionPattern;

use crate::error::{CliError, Result};
use crate::setup::{sub_seed, AttackerKind, Ctx};

pub const PLAN_FILE: &str = "plan.csv";
pub const POLICY_FILE: &str = "policy.json";
pub const CURVE_FILE: &str = "reward_curve.csv";
pub const STATS_FILE: &str = "train_stats.json";

pub fn policy_path(ctx: &Ctx) -> std::path::PathBuf {
    ctx.out.join(POLICY_FILE)
}

pub fn load_policy(ctx: &Ctx) -> Result<PolicySpec> {
    let path = policy_path(ctx);
    let raw = fs::read(&path).map_err(|e| {
        CliError::Config(format!("missing policy file {}: {e}", path.display()))
    })?;
    Ok(serde_json::from_slice(&raw)?)
}

/// `masked = false` trains the ablation without the feasibility mask; its
/// artifacts get an `_unmasked` suffix and the policy is not persisted for
/// tracking.
pub fn run(ctx: &Ctx, attacker: AttackerKind, masked: bool) -> Result<()> {
    match attacker {
        AttackerKind::Oracle | AttackerKind::None => plan_oracle(ctx, attacker),
        AttackerKind::Ppo => train_ppo(ctx, masked),
    }
}

fn plan_oracle(ctx: &Ctx, attacker: AttackerKind) -> Result<()> {
    let env = ctx.env()?;
    let road = &ctx.cfg.road;
    let traj = gen_ground_truth(
        MotionPattern::Straight,
        road.horizon,
        ctx.cfg.scenario.slot_s,
        road,
        &ctx.cfg.consistency,
        sub_seed(ctx.seed, "plan-traj", 0),
    )?;
    let states = traj.states();
    let mut out = String::new();
    out.push_str("k,theta0,action_hz,feasible,reward,x_sensed,y_sensed,v_sensed\n");
    match attacker {
        AttackerKind::Oracle => {
            let plan = oracle_plan(&env, states, ctx.cfg.attack.oracle_horizon)?;
            for s in &plan.slots {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    s.k,
                    s.theta0,
                    s.action.unwrap_or(0.0),
                    s.feasible as u8,
                    s.reward,
                    s.sensed.x,
                    s.sensed.y,
                    s.sensed.v
                ));
            }
        }
        AttackerKind::None => {
            // Silent baseline: the same loop with the RIS off.
            let mut xi = env.initial_state(&states[0], &states[1])?;
            for k in 1..states.len() {
                let o = env.step(&xi, None, states.get(k + 1), None)?;
                out.push_str(&format!(
                    "{k},{},0,0,{},{},{},{}\n",
                    o.theta0, o.reward, o.sensed.x, o.sensed.y, o.sensed.v
                ));
                match o.next {
                    Some(n) => xi = n,
                    None => break,
                }
            }
        }
        AttackerKind::Ppo => unreachable!(),
    }
    let mut f = fs::File::create(ctx.out.join(PLAN_FILE))?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn train_ppo(ctx: &Ctx, masked: bool) -> Result<()> {
    let env = ctx.env()?;
    let hyper = PpoHyper::from_config(&ctx.cfg.attack);
    let report = ppo_train(&env, &ctx.cfg.road, &hyper, masked, sub_seed(ctx.seed, "ppo", 0))?;

    let suffix = if masked { "" } else { "_unmasked" };
    let mut curve = String::from("episode,mean_reward\n");
    for (ep, r) in &report.reward_curve {
        curve.push_str(&format!("{ep},{r}\n"));
    }
    fs::write(ctx.out.join(format!("reward_curve{suffix}.csv")), curve)?;

    let stats = serde_json::json!({
        "masked": masked,
        "mean_reward": report.eval.mean_reward,
        "infeasible_frac": report.eval.infeasible_frac,
        "clean_frac": report.eval.clean_frac,
        "median_speed_error": report.eval.median_speed_error,
        "spoofed_slot_frac": report.eval.spoofed_slot_frac,
    });
    fs::write(
        ctx.out.join(format!("train_stats{suffix}.json")),
        serde_json::to_string_pretty(&stats)? + "\n",
    )?;

    if masked {
        fs::write(policy_path(ctx), serde_json::to_string_pretty(&report.policy)? + "\n")?;
    }
    Ok(())
}
